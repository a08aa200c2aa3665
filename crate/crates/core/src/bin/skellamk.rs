use std::process::exit;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    exit(skellamk::cli::run(&argv));
}
