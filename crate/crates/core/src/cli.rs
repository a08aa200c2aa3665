//! Command-line front end: simulate trajectories, emit PMF tables and Lévy
//! atoms, print moments, run verification suites, and check governing
//! equations. All output is machine-readable (CSV or JSON).
//!
//! Exit status: 0 on success/pass, 2 on verification failure, 1 on usage or
//! domain errors.

use crate::analytic;
use crate::error::{Error, Result};
use crate::governing;
use crate::montecarlo;
use crate::process::ProcessSpec;
use crate::subordinators::SubordinatorSpec;
use crate::trajectories::{self, Trajectory};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Pmf,
    Levy,
    Moments,
    Verify,
    Govern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One fully-resolved invocation; round-trips losslessly through JSON and
/// can be supplied wholesale via `--config file.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub spec: ProcessSpec,
    pub t: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Parser, Debug)]
#[command(name = "skellamk", version, about = "Skellam-type point processes of order k")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Simulate one sample path and write it as CSV (`t,value`)
    Simulate(CommonArgs),
    /// Evaluate the PMF table at time t
    Pmf(CommonArgs),
    /// Emit the Lévy measure atoms (`--n` caps the atom count per side)
    Levy(CommonArgs),
    /// Print mean, variance, and the covariance Cov(t/2, t)
    Moments(CommonArgs),
    /// Estimate the empirical PMF and test it against the analytic table
    Verify(CommonArgs),
    /// Check the governing difference-differential equation residual
    Govern(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Process family: skellam | ppok | spok | ppok-avg | spok-avg | sfpp |
    /// tsfpp | sfsp | tsfsp | tcspok
    #[arg(long)]
    process: Option<String>,

    /// Comma-separated parameters, e.g. k=2,l1=1,l2=1 or alpha=0.5,l1=2;
    /// tcspok adds sub=gamma,sub_p=2,sub_alpha=3 (or tempered_stable /
    /// inverse_gaussian / stable with sub_alpha, sub_mu, sub_gamma,
    /// sub_delta)
    #[arg(long, default_value = "")]
    params: String,

    /// Read the whole run configuration from a RunConfig JSON file instead
    #[arg(long)]
    config: Option<PathBuf>,

    /// Time horizon / evaluation time
    #[arg(long, default_value_t = 1.0)]
    t: f64,

    /// Sample count (verify), atom truncation (levy)
    #[arg(long, default_value_t = 100_000)]
    n: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Series / table tolerance (govern: residual threshold)
    #[arg(long)]
    tol: Option<f64>,

    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    /// csv | json
    #[arg(long)]
    format: Option<String>,
}

fn parse_kv(params: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for piece in params.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = piece
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{piece}'")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

struct ParamReader {
    map: BTreeMap<String, String>,
}

impl ParamReader {
    fn real(&self, key: &str) -> Result<f64> {
        let raw = self
            .map
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing parameter '{key}'")))?;
        raw.parse().map_err(|_| Error::Parse(format!("parameter '{key}' is not a number: {raw}")))
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(_) => self.real(key),
        }
    }

    fn integer(&self, key: &str) -> Result<u32> {
        let raw = self
            .map
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing parameter '{key}'")))?;
        raw.parse().map_err(|_| Error::Parse(format!("parameter '{key}' is not an integer: {raw}")))
    }

    fn text(&self, key: &str) -> Result<&str> {
        self.map
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Parse(format!("missing parameter '{key}'")))
    }
}

/// Build a [`ProcessSpec`] from a family name and `key=value` parameters.
pub fn parse_process(process: &str, params: &str) -> Result<ProcessSpec> {
    let p = ParamReader { map: parse_kv(params)? };
    let spec = match process {
        "skellam" => ProcessSpec::Skellam { lambda1: p.real("l1")?, lambda2: p.real_or("l2", 0.0)? },
        "ppok" => ProcessSpec::Ppok { k: p.integer("k")?, lambda: p.real("l1")? },
        "spok" => ProcessSpec::Spok {
            k: p.integer("k")?,
            lambda1: p.real("l1")?,
            lambda2: p.real_or("l2", 0.0)?,
        },
        "ppok-avg" => ProcessSpec::RunningAvgPpok { k: p.integer("k")?, lambda: p.real("l1")? },
        "spok-avg" => ProcessSpec::RunningAvgSpok {
            k: p.integer("k")?,
            lambda1: p.real("l1")?,
            lambda2: p.real_or("l2", 0.0)?,
        },
        "sfpp" => ProcessSpec::Sfpp { alpha: p.real("alpha")?, lambda: p.real("l1")? },
        "tsfpp" => ProcessSpec::Tsfpp {
            alpha: p.real("alpha")?,
            mu: p.real("mu")?,
            lambda: p.real("l1")?,
        },
        "sfsp" => ProcessSpec::Sfsp {
            alpha1: p.real("alpha1")?,
            alpha2: p.real("alpha2")?,
            lambda1: p.real("l1")?,
            lambda2: p.real("l2")?,
        },
        "tsfsp" => ProcessSpec::Tsfsp {
            alpha1: p.real("alpha1")?,
            mu1: p.real("mu1")?,
            alpha2: p.real("alpha2")?,
            mu2: p.real("mu2")?,
            lambda1: p.real("l1")?,
            lambda2: p.real("l2")?,
        },
        "tcspok" => {
            let sub = match p.text("sub")? {
                "gamma" => SubordinatorSpec::Gamma {
                    p: p.real("sub_p")?,
                    alpha: p.real("sub_alpha")?,
                },
                "tempered_stable" => SubordinatorSpec::TemperedStable {
                    alpha: p.real("sub_alpha")?,
                    mu: p.real("sub_mu")?,
                },
                "inverse_gaussian" => SubordinatorSpec::InverseGaussian {
                    gamma: p.real("sub_gamma")?,
                    delta: p.real("sub_delta")?,
                },
                "stable" => SubordinatorSpec::Stable { alpha: p.real("sub_alpha")? },
                other => return Err(Error::Parse(format!("unknown subordinator '{other}'"))),
            };
            ProcessSpec::TimeChangedSpok {
                k: p.integer("k")?,
                lambda1: p.real("l1")?,
                lambda2: p.real_or("l2", 0.0)?,
                subordinator: sub,
            }
        }
        other => return Err(Error::Parse(format!("unknown process '{other}'"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn resolve_config(cmd: Command, args: &CommonArgs) -> Result<RunConfig> {
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        if cfg.command != cmd {
            return Err(Error::Parse(format!(
                "config file command {:?} does not match the invoked subcommand {:?}",
                cfg.command, cmd
            )));
        }
        return Ok(cfg);
    }
    let process = args
        .process
        .as_deref()
        .ok_or_else(|| Error::Parse("either --process or --config is required".into()))?;
    let spec = parse_process(process, &args.params)?;
    let default_tol = match cmd {
        Command::Govern => 1e-5,
        _ => 1e-10,
    };
    let format = match args.format.as_deref() {
        None => match cmd {
            Command::Simulate => OutputFormat::Csv,
            _ => OutputFormat::Json,
        },
        Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => return Err(Error::Parse(format!("unknown format '{other}'"))),
    };
    Ok(RunConfig {
        command: cmd,
        spec,
        t: args.t,
        n_samples: args.n,
        seed: args.seed,
        tol: args.tol.unwrap_or(default_tol),
        out: args.out.clone(),
        format,
    })
}

fn emit(out: &Option<PathBuf>, payload: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, payload)?;
        }
        None => {
            print!("{payload}");
            std::io::stdout().flush()?;
        }
    }
    Ok(())
}

fn run_simulate(cfg: &RunConfig) -> Result<i32> {
    if cfg.format != OutputFormat::Csv {
        return Err(Error::Parse("simulate emits trajectory CSV only".into()));
    }
    let mut buf = Vec::new();
    match cfg.spec {
        ProcessSpec::RunningAvgPpok { k, lambda } => {
            // the running average has continuous paths; emit the exact
            // average sampled at the underlying path's jump epochs
            let mut rng = montecarlo::replicate_rng(cfg.seed, 0);
            let path = trajectories::simulate_ppok(k, lambda, cfg.t, &mut rng);
            write_running_average_csv(&path, cfg.t, &mut buf)?;
        }
        ProcessSpec::RunningAvgSpok { k, lambda1, lambda2 } => {
            let mut rng = montecarlo::replicate_rng(cfg.seed, 0);
            let inner = ProcessSpec::Spok { k, lambda1, lambda2 };
            let path = trajectories::simulate(&inner, cfg.t, &mut rng)?;
            write_running_average_csv(&path, cfg.t, &mut buf)?;
        }
        _ => {
            let mut rng = montecarlo::replicate_rng(cfg.seed, 0);
            let traj = trajectories::simulate(&cfg.spec, cfg.t, &mut rng)?;
            traj.write_csv(&mut buf)?;
        }
    }
    emit(&cfg.out, &String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(0)
}

fn write_running_average_csv(path: &Trajectory, t: f64, buf: &mut Vec<u8>) -> Result<()> {
    writeln!(buf, "t,value")?;
    writeln!(buf, "0,0")?;
    for e in path.epochs.iter().filter(|e| **e <= t) {
        let v = trajectories::running_average(path, *e)?;
        writeln!(buf, "{},{}", fmt(*e), fmt(v))?;
    }
    writeln!(buf, "{},{}", fmt(t), fmt(trajectories::running_average(path, t)?))?;
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn run_pmf(cfg: &RunConfig) -> Result<i32> {
    let table = analytic::pmf_table(&cfg.spec, cfg.t, cfg.tol)?;
    let payload = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&table)? + "\n",
        OutputFormat::Csv => {
            let mut s = String::from("m,prob\n");
            for m in table.m_lo..=table.m_hi {
                s.push_str(&format!("{},{}\n", m, fmt(table.prob_or_zero(m))));
            }
            s
        }
    };
    emit(&cfg.out, &payload)?;
    Ok(0)
}

fn run_levy(cfg: &RunConfig) -> Result<i32> {
    let truncation = cfg.n_samples.min(10_000) as u32;
    let measure = analytic::levy_measure(&cfg.spec, truncation)?;
    let payload = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&measure)? + "\n",
        OutputFormat::Csv => {
            let mut s = String::from("location,mass\n");
            for (l, m) in &measure.atoms {
                s.push_str(&format!("{},{}\n", l, fmt(*m)));
            }
            s
        }
    };
    emit(&cfg.out, &payload)?;
    Ok(0)
}

fn run_moments(cfg: &RunConfig) -> Result<i32> {
    let (mean, variance) = analytic::moments(&cfg.spec, cfg.t)?;
    let s = cfg.t / 2.0;
    let covariance = analytic::covariance(&cfg.spec, s, cfg.t)?;
    let payload = format!(
        "{{\"mean\":{},\"variance\":{},\"cov_s\":{},\"covariance\":{}}}\n",
        fmt(mean),
        fmt(variance),
        fmt(s),
        fmt(covariance)
    );
    emit(&cfg.out, &payload)?;
    if cfg.out.is_some() {
        println!(
            "mean={} variance={} covariance({},{})={}",
            fmt(mean),
            fmt(variance),
            fmt(s),
            fmt(cfg.t),
            fmt(covariance)
        );
    }
    Ok(0)
}

/// Verification thresholds: chi-square p >= 0.01 and TV <= 0.01 at
/// n >= 1e5 samples.
const VERIFY_P_MIN: f64 = 0.01;
const VERIFY_TV_MAX: f64 = 0.01;

fn run_verify(cfg: &RunConfig) -> Result<i32> {
    match cfg.spec {
        ProcessSpec::RunningAvgPpok { .. } | ProcessSpec::RunningAvgSpok { .. } => {
            verify_running_average(cfg)
        }
        ProcessSpec::Spok { k, lambda1, lambda2 } if k >= 2 && lambda2 > 0.0 => {
            verify_spok_both_forms(cfg, k, lambda1, lambda2)
        }
        ProcessSpec::TimeChangedSpok { k, lambda1, lambda2, subordinator } => {
            verify_tcspok_both_forms(cfg, k, lambda1, lambda2, &subordinator)
        }
        _ => {
            let emp = montecarlo::estimate_pmf(&cfg.spec, cfg.t, cfg.n_samples, cfg.seed)?;
            let table = analytic::pmf_table(&cfg.spec, cfg.t, cfg.tol)?;
            let cmp = montecarlo::compare(&emp, &table)?;
            let pass = cmp.chi2_pvalue >= VERIFY_P_MIN && cmp.tv_distance <= VERIFY_TV_MAX;
            println!(
                "verify {}: tv={:.6} chi2={:.3} dof={} p={:.6} -> {}",
                cfg.spec.family_name(),
                cmp.tv_distance,
                cmp.chi2_stat,
                cmp.dof,
                cmp.chi2_pvalue,
                if pass { "PASS" } else { "FAIL" }
            );
            Ok(if pass { 0 } else { 2 })
        }
    }
}

fn verify_spok_both_forms(cfg: &RunConfig, k: u32, lambda1: f64, lambda2: f64) -> Result<i32> {
    let emp = montecarlo::estimate_pmf(&cfg.spec, cfg.t, cfg.n_samples, cfg.seed)?;
    let conv = analytic::pmf_table(&cfg.spec, cfg.t, cfg.tol)?;
    let cmp_conv = montecarlo::compare(&emp, &conv)?;

    let mut closed = conv.clone();
    for (i, m) in (closed.m_lo..=closed.m_hi).enumerate() {
        closed.probs[i] = analytic::spok_pmf_closedform(k, lambda1, lambda2, cfg.t, m)?;
    }
    closed.truncation_bound = (1.0 - closed.total()).max(0.0);
    let cmp_closed = montecarlo::compare(&emp, &closed)?;

    let pass = cmp_conv.chi2_pvalue >= VERIFY_P_MIN && cmp_conv.tv_distance <= VERIFY_TV_MAX;
    println!(
        "verify spok (convolution pmf): tv={:.6} p={:.6} -> {}",
        cmp_conv.tv_distance,
        cmp_conv.chi2_pvalue,
        if pass { "PASS" } else { "FAIL" }
    );
    println!(
        "verify spok (closed-form pmf): tv={:.6} p={:.3e} -> {}",
        cmp_closed.tv_distance,
        cmp_closed.chi2_pvalue,
        if cmp_closed.chi2_pvalue >= VERIFY_P_MIN { "PASS" } else { "FAIL" }
    );
    if pass && cmp_closed.chi2_pvalue < VERIFY_P_MIN {
        println!(
            "note: the closed-form marginal (an ordinary Skellam at rates k*l1, k*l2) \
             disagrees with the order-k difference law for k >= 2; samples side with \
             the convolution"
        );
    }
    Ok(if pass { 0 } else { 2 })
}

fn verify_tcspok_both_forms(
    cfg: &RunConfig,
    k: u32,
    lambda1: f64,
    lambda2: f64,
    sub: &crate::subordinators::SubordinatorSpec,
) -> Result<i32> {
    let emp = montecarlo::estimate_pmf(&cfg.spec, cfg.t, cfg.n_samples, cfg.seed)?;
    // theorem-form mixture table (inherits the closed-form marginal)
    let theorem = analytic::pmf_table(&cfg.spec, cfg.t, cfg.tol)?;
    // definition-faithful law of the simulated process
    let mut definitional = theorem.clone();
    definitional.probs = analytic::tcspok_pmf_definitional(
        k,
        lambda1,
        lambda2,
        sub,
        cfg.t,
        definitional.m_lo,
        definitional.m_hi,
    )?;
    definitional.truncation_bound = (1.0 - definitional.total()).max(0.0);

    let cmp_def = montecarlo::compare(&emp, &definitional)?;
    let cmp_thm = montecarlo::compare(&emp, &theorem)?;
    let pass = cmp_def.chi2_pvalue >= VERIFY_P_MIN && cmp_def.tv_distance <= VERIFY_TV_MAX;
    println!(
        "verify tcspok (subordinated order-k law): tv={:.6} p={:.6} -> {}",
        cmp_def.tv_distance,
        cmp_def.chi2_pvalue,
        if pass { "PASS" } else { "FAIL" }
    );
    println!(
        "verify tcspok (series with closed-form marginal): tv={:.6} p={:.3e} -> {}",
        cmp_thm.tv_distance,
        cmp_thm.chi2_pvalue,
        if cmp_thm.chi2_pvalue >= VERIFY_P_MIN { "PASS" } else { "FAIL" }
    );
    if pass && cmp_thm.chi2_pvalue < VERIFY_P_MIN {
        println!(
            "note: the series form mixes the closed-form order-k marginal and \
             inherits its k >= 2 discrepancy; samples side with the subordinated \
             difference law"
        );
    }
    Ok(if pass { 0 } else { 2 })
}

fn verify_running_average(cfg: &RunConfig) -> Result<i32> {
    // distributional check: compound representation vs exact pathwise
    // integral, two-sample KS
    let n_ks = cfg.n_samples.min(10_000);
    let compound = montecarlo::draw_samples(&cfg.spec, cfg.t, n_ks, cfg.seed)?;
    let inner = match cfg.spec {
        ProcessSpec::RunningAvgPpok { k, lambda } => ProcessSpec::Ppok { k, lambda },
        ProcessSpec::RunningAvgSpok { k, lambda1, lambda2 } => {
            ProcessSpec::Spok { k, lambda1, lambda2 }
        }
        _ => unreachable!(),
    };
    let mut pathwise = Vec::with_capacity(n_ks as usize);
    for i in 0..n_ks {
        let mut rng = montecarlo::replicate_rng(cfg.seed ^ 0x5eed, i);
        let path = trajectories::simulate(&inner, cfg.t, &mut rng)?;
        pathwise.push(trajectories::running_average(&path, cfg.t)?);
    }
    let (d, p) = montecarlo::ks2_test(&compound, &pathwise);
    let (mean, se_mean) = montecarlo::mean_se(&compound);
    let (expect_mean, _) = analytic::moments(&cfg.spec, cfg.t)?;
    let mean_ok = (mean - expect_mean).abs() <= 4.0 * se_mean;
    let pass = p >= VERIFY_P_MIN && mean_ok;
    println!(
        "verify {}: ks_d={:.5} ks_p={:.4} mean={:.4} expected={:.4} -> {}",
        cfg.spec.family_name(),
        d,
        p,
        mean,
        expect_mean,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 2 })
}

fn run_govern(cfg: &RunConfig) -> Result<i32> {
    let window = match cfg.spec {
        ProcessSpec::Ppok { .. } | ProcessSpec::Sfpp { .. } | ProcessSpec::Tsfpp { .. } => (0, 15),
        _ => (-10, 10),
    };
    let dt = 1e-4 * cfg.t;
    let residual = governing::governing_residual(&cfg.spec, cfg.t, dt, window)?;
    let threshold = cfg.tol;
    let pass = residual < threshold;
    println!(
        "govern {}: max residual {:.3e} over window [{}, {}] (threshold {:.1e}) -> {}",
        cfg.spec.family_name(),
        residual,
        window.0,
        window.1,
        threshold,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 2 })
}

fn dispatch(cfg: &RunConfig) -> Result<i32> {
    match cfg.command {
        Command::Simulate => run_simulate(cfg),
        Command::Pmf => run_pmf(cfg),
        Command::Levy => run_levy(cfg),
        Command::Moments => run_moments(cfg),
        Command::Verify => run_verify(cfg),
        Command::Govern => run_govern(cfg),
    }
}

/// Entry point: parse `argv` (including the program name), execute, and
/// return the exit status.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (cmd, args) = match &cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Pmf(a) => (Command::Pmf, a),
        Cmd::Levy(a) => (Command::Levy, a),
        Cmd::Moments(a) => (Command::Moments, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Govern(a) => (Command::Govern, a),
    };
    match resolve_config(cmd, args).and_then(|cfg| dispatch(&cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
