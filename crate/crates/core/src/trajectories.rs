//! Exact path simulation.
//!
//! Every jump family is simulated as a piecewise-constant, right-continuous
//! path: exponential inter-arrival times by inverse CDF, jump sizes uniform
//! on `{1..k}`, Skellam-type paths as merged differences of two independent
//! one-sided paths. Subordinated families run on an operational-time grid
//! whose granularity is a recorded parameter of the run.

use crate::error::{Error, Result};
use crate::process::ProcessSpec;
use crate::subordinators::SubordinatorSpec;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use std::io::{BufRead, Write};

/// Default operational-time grid resolution per unit of calendar time.
pub const DEFAULT_STEPS_PER_UNIT: usize = 1000;

/// Piecewise-constant sample path over `[0, horizon]`.
///
/// `epochs` are the strictly increasing jump times in `(0, horizon]`;
/// `values[i]` is the state immediately after `epochs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub horizon: f64,
    pub initial_value: f64,
    pub epochs: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn constant(horizon: f64, value: f64) -> Self {
        Trajectory { horizon, initial_value: value, epochs: Vec::new(), values: Vec::new() }
    }

    /// State at time `t` (right-continuous lookup).
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.epochs.partition_point(|&e| e <= t);
        if idx == 0 {
            self.initial_value
        } else {
            self.values[idx - 1]
        }
    }

    pub fn terminal(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.initial_value)
    }

    pub fn jump_count(&self) -> usize {
        self.epochs.len()
    }

    /// CSV serialization: header `t,value`, a row at `t = 0`, one row per
    /// epoch, and a closing row at `t = horizon`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,value")?;
        writeln!(w, "0,{}", fmt_f64(self.initial_value))?;
        for (e, v) in self.epochs.iter().zip(&self.values) {
            writeln!(w, "{},{}", fmt_f64(*e), fmt_f64(*v))?;
        }
        writeln!(w, "{},{}", fmt_f64(self.horizon), fmt_f64(self.terminal()))?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "t,value" => {}
            _ => return Err(Error::Parse("expected header 't,value'".into())),
        }
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad trajectory row: {line}")))?;
            let t: f64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad t: {a}")))?;
            let v: f64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad value: {b}")))?;
            rows.push((t, v));
        }
        if rows.len() < 2 || rows[0].0 != 0.0 {
            return Err(Error::Parse("trajectory CSV needs rows at t = 0 and t = horizon".into()));
        }
        let initial_value = rows[0].1;
        let (horizon, _) = *rows.last().unwrap();
        let body = &rows[1..rows.len() - 1];
        Ok(Trajectory {
            horizon,
            initial_value,
            epochs: body.iter().map(|r| r.0).collect(),
            values: body.iter().map(|r| r.1).collect(),
        })
    }
}

/// Shortest decimal representation that round-trips to the same f64.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[inline]
fn clamp_open01(u: f64) -> f64 {
    u.clamp(1e-15, 1.0 - 1e-15)
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> i64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as i64
}

/// Poisson process of order k over `[0, horizon]`: jumps of each size
/// `1..=k` arrive at rate `lambda`, so inter-arrivals are exponential with
/// total rate `k lambda` and sizes are uniform on `{1..=k}`.
pub fn simulate_ppok<R: Rng + ?Sized>(k: u32, lambda: f64, horizon: f64, rng: &mut R) -> Trajectory {
    assert!(k >= 1 && lambda > 0.0 && horizon > 0.0);
    let rate = k as f64 * lambda;
    let mut epochs = Vec::new();
    let mut values = Vec::new();
    let mut t = 0.0f64;
    let mut state = 0i64;
    loop {
        t += -clamp_open01(rng.random::<f64>()).ln() / rate;
        if t >= horizon {
            break;
        }
        state += rng.random_range(1..=k) as i64;
        epochs.push(t);
        values.push(state as f64);
    }
    Trajectory { horizon, initial_value: 0.0, epochs, values }
}

/// Pathwise difference `a - b` with merged epochs. Ties (probability zero
/// under continuous arrivals) collapse into a single epoch with the net jump.
pub fn merge_difference(a: &Trajectory, b: &Trajectory) -> Trajectory {
    assert_eq!(a.horizon, b.horizon);
    let mut epochs = Vec::with_capacity(a.epochs.len() + b.epochs.len());
    let mut values = Vec::with_capacity(epochs.capacity());
    let (mut i, mut j) = (0usize, 0usize);
    let mut cur = a.initial_value - b.initial_value;
    while i < a.epochs.len() || j < b.epochs.len() {
        let ta = a.epochs.get(i).copied().unwrap_or(f64::INFINITY);
        let tb = b.epochs.get(j).copied().unwrap_or(f64::INFINITY);
        let t = ta.min(tb);
        if ta == t {
            i += 1;
        }
        if tb == t {
            j += 1;
        }
        let va = if i == 0 { a.initial_value } else { a.values[i - 1] };
        let vb = if j == 0 { b.initial_value } else { b.values[j - 1] };
        let v = va - vb;
        if v != cur {
            epochs.push(t);
            values.push(v);
            cur = v;
        }
    }
    Trajectory {
        horizon: a.horizon,
        initial_value: a.initial_value - b.initial_value,
        epochs,
        values,
    }
}

/// Exact value of `(1/t) ∫_0^t X(s) ds` over the piecewise-constant path.
pub fn running_average(traj: &Trajectory, t: f64) -> Result<f64> {
    if !(t > 0.0) || t > traj.horizon {
        return Err(Error::domain(format!(
            "running_average requires 0 < t <= horizon ({}), got {t}",
            traj.horizon
        )));
    }
    let mut acc = 0.0f64;
    let mut prev_t = 0.0f64;
    let mut prev_v = traj.initial_value;
    for (e, v) in traj.epochs.iter().zip(&traj.values) {
        if *e >= t {
            break;
        }
        acc += prev_v * (e - prev_t);
        prev_t = *e;
        prev_v = *v;
    }
    acc += prev_v * (t - prev_t);
    Ok(acc / t)
}

/// Counting process subordinated by `sub` on a uniform grid of `n_steps`
/// operational-time increments: per slice, a Poisson(λ ΔD) batch of unit
/// jumps lands at the grid time.
fn simulate_subordinated_poisson<R: Rng + ?Sized>(
    lambda: f64,
    sub: &SubordinatorSpec,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Trajectory {
    let dt = horizon / n_steps as f64;
    let mut epochs = Vec::new();
    let mut values = Vec::new();
    let mut state = 0i64;
    for i in 1..=n_steps {
        let d_op = sub.sample_increment(dt, rng);
        let jumps = poisson_draw(lambda * d_op, rng);
        if jumps > 0 {
            state += jumps;
            epochs.push(dt * i as f64);
            values.push(state as f64);
        }
    }
    Trajectory { horizon, initial_value: 0.0, epochs, values }
}

/// Skellam-type path of order k subordinated on a uniform grid: the inner
/// up/down increments over each operational-time slice are independent
/// Poisson counts per jump size.
fn simulate_subordinated_spok<R: Rng + ?Sized>(
    k: u32,
    lambda1: f64,
    lambda2: f64,
    sub: &SubordinatorSpec,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Trajectory {
    let dt = horizon / n_steps as f64;
    let mut epochs = Vec::new();
    let mut values = Vec::new();
    let mut state = 0i64;
    for i in 1..=n_steps {
        let d_op = sub.sample_increment(dt, rng);
        let mut change = 0i64;
        for j in 1..=k as i64 {
            change += j * poisson_draw(lambda1 * d_op, rng);
            if lambda2 > 0.0 {
                change -= j * poisson_draw(lambda2 * d_op, rng);
            }
        }
        if change != 0 {
            state += change;
            epochs.push(dt * i as f64);
            values.push(state as f64);
        }
    }
    Trajectory { horizon, initial_value: 0.0, epochs, values }
}

/// Simulate one path of `spec` over `[0, horizon]` with the default grid
/// resolution for the subordinated families.
pub fn simulate<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    horizon: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    let steps = ((horizon * DEFAULT_STEPS_PER_UNIT as f64).ceil() as usize).max(1);
    simulate_with_steps(spec, horizon, steps, rng)
}

/// Simulate with an explicit operational-time grid of `n_steps` (ignored by
/// the exactly-simulated jump families).
pub fn simulate_with_steps<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    spec.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::domain(format!("simulate requires horizon > 0, got {horizon}")));
    }
    if n_steps == 0 {
        return Err(Error::domain("simulate requires n_steps >= 1"));
    }
    Ok(match *spec {
        ProcessSpec::Ppok { k, lambda } => simulate_ppok(k, lambda, horizon, rng),
        ProcessSpec::Skellam { lambda1, lambda2 } => {
            let a = simulate_ppok(1, lambda1, horizon, rng);
            let b = if lambda2 > 0.0 {
                simulate_ppok(1, lambda2, horizon, rng)
            } else {
                Trajectory::constant(horizon, 0.0)
            };
            merge_difference(&a, &b)
        }
        ProcessSpec::Spok { k, lambda1, lambda2 } => {
            let a = simulate_ppok(k, lambda1, horizon, rng);
            let b = if lambda2 > 0.0 {
                simulate_ppok(k, lambda2, horizon, rng)
            } else {
                Trajectory::constant(horizon, 0.0)
            };
            merge_difference(&a, &b)
        }
        ProcessSpec::Sfpp { alpha, lambda } => {
            if alpha == 1.0 {
                simulate_ppok(1, lambda, horizon, rng)
            } else {
                let sub = SubordinatorSpec::Stable { alpha };
                simulate_subordinated_poisson(lambda, &sub, horizon, n_steps, rng)
            }
        }
        ProcessSpec::Tsfpp { alpha, mu, lambda } => {
            if alpha == 1.0 {
                simulate_ppok(1, lambda, horizon, rng)
            } else {
                let sub = SubordinatorSpec::TemperedStable { alpha, mu };
                simulate_subordinated_poisson(lambda, &sub, horizon, n_steps, rng)
            }
        }
        ProcessSpec::Sfsp { alpha1, alpha2, lambda1, lambda2 } => {
            let one = ProcessSpec::Sfpp { alpha: alpha1, lambda: lambda1 };
            let two = ProcessSpec::Sfpp { alpha: alpha2, lambda: lambda2 };
            let a = simulate_with_steps(&one, horizon, n_steps, rng)?;
            let b = simulate_with_steps(&two, horizon, n_steps, rng)?;
            merge_difference(&a, &b)
        }
        ProcessSpec::Tsfsp { alpha1, mu1, alpha2, mu2, lambda1, lambda2 } => {
            let one = ProcessSpec::Tsfpp { alpha: alpha1, mu: mu1, lambda: lambda1 };
            let two = ProcessSpec::Tsfpp { alpha: alpha2, mu: mu2, lambda: lambda2 };
            let a = simulate_with_steps(&one, horizon, n_steps, rng)?;
            let b = simulate_with_steps(&two, horizon, n_steps, rng)?;
            merge_difference(&a, &b)
        }
        ProcessSpec::TimeChangedSpok { k, lambda1, lambda2, subordinator } => {
            simulate_subordinated_spok(k, lambda1, lambda2, &subordinator, horizon, n_steps, rng)
        }
        ProcessSpec::RunningAvgPpok { .. } | ProcessSpec::RunningAvgSpok { .. } => {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name().into(),
                op: "simulate (running averages have continuous paths; use \
                     simulate_running_avg_compound or average an underlying path)",
            });
        }
    })
}

/// One draw of the running-average value at time `t` through its compound
/// Poisson representation: `N ~ Poisson(k (λ1 + λ2) t)` jumps, each a
/// uniform(0, i) magnitude with `i` uniform on `{1..k}`, signed positive
/// with probability `λ1/(λ1 + λ2)`.
pub fn simulate_running_avg_compound<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    spec.validate()?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("requires t > 0, got {t}")));
    }
    let (k, l1, l2) = match *spec {
        ProcessSpec::RunningAvgPpok { k, lambda } => (k, lambda, 0.0),
        ProcessSpec::RunningAvgSpok { k, lambda1, lambda2 } => (k, lambda1, lambda2),
        _ => {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name().into(),
                op: "simulate_running_avg_compound",
            })
        }
    };
    let total = l1 + l2;
    let n = poisson_draw(k as f64 * total * t, rng);
    let w = l1 / total;
    let mut sum = 0.0f64;
    for _ in 0..n {
        let i = rng.random_range(1..=k) as f64;
        let u: f64 = rng.random();
        let sign = if l2 == 0.0 || rng.random::<f64>() < w { 1.0 } else { -1.0 };
        sum += sign * u * i;
    }
    Ok(sum)
}

/// One terminal value `X(t)`.
///
/// Jump families run the exact path simulator; subordinated families draw
/// the operational time `D(t)` exactly and feed it to the inner counts, so
/// no grid error enters; running averages use the compound representation.
pub fn sample_terminal<R: Rng + ?Sized>(spec: &ProcessSpec, t: f64, rng: &mut R) -> Result<f64> {
    spec.validate()?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("sample_terminal requires t > 0, got {t}")));
    }
    Ok(match *spec {
        ProcessSpec::Skellam { .. } | ProcessSpec::Ppok { .. } | ProcessSpec::Spok { .. } => {
            simulate(spec, t, rng)?.terminal()
        }
        ProcessSpec::Sfpp { alpha, lambda } => {
            let op = if alpha == 1.0 {
                t
            } else {
                SubordinatorSpec::Stable { alpha }.sample_total(t, rng)
            };
            poisson_draw(lambda * op, rng) as f64
        }
        ProcessSpec::Tsfpp { alpha, mu, lambda } => {
            let op = if alpha == 1.0 {
                t
            } else {
                SubordinatorSpec::TemperedStable { alpha, mu }.sample_total(t, rng)
            };
            poisson_draw(lambda * op, rng) as f64
        }
        ProcessSpec::Sfsp { alpha1, alpha2, lambda1, lambda2 } => {
            let a =
                sample_terminal(&ProcessSpec::Sfpp { alpha: alpha1, lambda: lambda1 }, t, rng)?;
            let b =
                sample_terminal(&ProcessSpec::Sfpp { alpha: alpha2, lambda: lambda2 }, t, rng)?;
            a - b
        }
        ProcessSpec::Tsfsp { alpha1, mu1, alpha2, mu2, lambda1, lambda2 } => {
            let a = sample_terminal(
                &ProcessSpec::Tsfpp { alpha: alpha1, mu: mu1, lambda: lambda1 },
                t,
                rng,
            )?;
            let b = sample_terminal(
                &ProcessSpec::Tsfpp { alpha: alpha2, mu: mu2, lambda: lambda2 },
                t,
                rng,
            )?;
            a - b
        }
        ProcessSpec::TimeChangedSpok { k, lambda1, lambda2, subordinator } => {
            let op = subordinator.sample_total(t, rng);
            let mut v = 0i64;
            for j in 1..=k as i64 {
                v += j * poisson_draw(lambda1 * op, rng);
                if lambda2 > 0.0 {
                    v -= j * poisson_draw(lambda2 * op, rng);
                }
            }
            v as f64
        }
        ProcessSpec::RunningAvgPpok { .. } | ProcessSpec::RunningAvgSpok { .. } => {
            simulate_running_avg_compound(spec, t, rng)?
        }
    })
}
