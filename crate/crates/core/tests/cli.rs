//! End-to-end checks of the command-line surface: file formats, round
//! trips, determinism, and exit codes.

use skellamk::cli::{self, Command, OutputFormat, RunConfig};
use skellamk::process::ProcessSpec;
use skellamk::subordinators::SubordinatorSpec;
use skellamk::trajectories::Trajectory;
use std::path::PathBuf;

fn argv(parts: &[&str]) -> Vec<String> {
    std::iter::once("skellamk")
        .chain(parts.iter().copied())
        .map(|s| s.to_string())
        .collect()
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("skellamk-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn simulate_writes_trajectory_csv_with_contract_rows() {
    let dir = tmpdir("sim");
    let out = dir.join("path.csv");
    let code = cli::run(&argv(&[
        "simulate",
        "--process",
        "sfsp",
        "--params",
        "alpha1=0.9,alpha2=0.9,l1=1,l2=1",
        "--t",
        "10",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,value");
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,"), "first row at t=0: {first}");
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("10,"), "closing row at t=horizon: {last}");

    // re-ingest reproduces the in-memory object exactly
    let mut reader = std::io::BufReader::new(std::fs::File::open(&out).unwrap());
    let traj = Trajectory::read_csv(&mut reader).unwrap();
    assert_eq!(traj.horizon, 10.0);
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), text);
}

#[test]
fn same_argv_and_seed_give_byte_identical_files() {
    let dir = tmpdir("det");
    let out1 = dir.join("a.csv");
    let out2 = dir.join("b.csv");
    for out in [&out1, &out2] {
        let code = cli::run(&argv(&[
            "simulate",
            "--process",
            "tcspok",
            "--params",
            "k=2,l1=1,l2=0.5,sub=gamma,sub_p=2,sub_alpha=2",
            "--t",
            "3",
            "--seed",
            "99",
            "--out",
            out.to_str().unwrap(),
        ]));
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn pmf_json_round_trips_and_matches_oracle() {
    let dir = tmpdir("pmf");
    let out = dir.join("skellam.json");
    let code = cli::run(&argv(&[
        "pmf",
        "--process",
        "skellam",
        "--params",
        "l1=1,l2=1",
        "--t",
        "1",
        "--tol",
        "1e-10",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let table: skellamk::analytic::PmfTable =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // m = 0 entry ≈ 0.3085083 (Bessel-series oracle)
    assert!((table.prob(0).unwrap() - 0.308_508_3).abs() < 1e-7);
    let again = serde_json::to_string_pretty(&table).unwrap() + "\n";
    assert_eq!(again, std::fs::read_to_string(&out).unwrap());
}

#[test]
fn levy_json_round_trips() {
    let dir = tmpdir("levy");
    let out = dir.join("atoms.json");
    let code = cli::run(&argv(&[
        "levy",
        "--process",
        "spok",
        "--params",
        "k=3,l1=2,l2=1",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let measure: skellamk::analytic::LevyMeasure =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(measure.atoms.len(), 6);
    assert_eq!(measure.mass_at(2), 2.0);
    assert_eq!(measure.mass_at(-3), 1.0);
}

#[test]
fn verify_spok_reports_discrepancy_and_exits_zero() {
    let code = cli::run(&argv(&[
        "verify",
        "--process",
        "spok",
        "--params",
        "k=2,l1=1,l2=1",
        "--t",
        "0.5",
        "--n",
        "200000",
        "--seed",
        "1",
    ]));
    assert_eq!(code, 0);
}

#[test]
fn govern_passes_at_default_threshold() {
    let code = cli::run(&argv(&[
        "govern",
        "--process",
        "ppok",
        "--params",
        "k=3,l1=1",
        "--t",
        "1",
    ]));
    assert_eq!(code, 0);
}

#[test]
fn config_file_drives_a_run() {
    let dir = tmpdir("cfg");
    let out = dir.join("out.json");
    let cfg = RunConfig {
        command: Command::Pmf,
        spec: ProcessSpec::Ppok { k: 2, lambda: 1.0 },
        t: 1.0,
        n_samples: 0,
        seed: 0,
        tol: 1e-9,
        out: Some(out.clone()),
        format: OutputFormat::Json,
    };
    let cfg_path = dir.join("run.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let code = cli::run(&argv(&["pmf", "--config", cfg_path.to_str().unwrap()]));
    assert_eq!(code, 0);
    assert!(out.exists());

    // mismatched subcommand is a usage error
    let code = cli::run(&argv(&["levy", "--config", cfg_path.to_str().unwrap()]));
    assert_eq!(code, 1);
}

#[test]
fn random_configs_round_trip_losslessly() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(314);
    for i in 0..50 {
        let spec = match i % 5 {
            0 => ProcessSpec::Skellam { lambda1: rng.random_range(0.1..4.0), lambda2: rng.random_range(0.1..4.0) },
            1 => ProcessSpec::Spok {
                k: rng.random_range(1..5),
                lambda1: rng.random_range(0.1..4.0),
                lambda2: rng.random_range(0.1..4.0),
            },
            2 => ProcessSpec::Sfpp { alpha: rng.random_range(0.1..1.0), lambda: rng.random_range(0.1..4.0) },
            3 => ProcessSpec::Tsfsp {
                alpha1: rng.random_range(0.1..1.0),
                mu1: rng.random_range(0.1..2.0),
                alpha2: rng.random_range(0.1..1.0),
                mu2: rng.random_range(0.1..2.0),
                lambda1: rng.random_range(0.1..4.0),
                lambda2: rng.random_range(0.1..4.0),
            },
            _ => ProcessSpec::TimeChangedSpok {
                k: rng.random_range(1..4),
                lambda1: rng.random_range(0.1..4.0),
                lambda2: rng.random_range(0.1..4.0),
                subordinator: SubordinatorSpec::InverseGaussian {
                    gamma: rng.random_range(0.1..3.0),
                    delta: rng.random_range(0.1..3.0),
                },
            },
        };
        let cfg = RunConfig {
            command: [Command::Simulate, Command::Pmf, Command::Levy, Command::Moments, Command::Verify, Command::Govern][i % 6],
            spec,
            t: rng.random_range(0.1..10.0),
            n_samples: rng.random_range(1..1_000_000),
            seed: rng.random(),
            tol: 10f64.powf(rng.random_range(-12.0..-3.0)),
            out: if i % 2 == 0 { None } else { Some(PathBuf::from(format!("/tmp/out-{i}.json"))) },
            format: if i % 3 == 0 { OutputFormat::Csv } else { OutputFormat::Json },
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back, "config {i}");
    }
}
