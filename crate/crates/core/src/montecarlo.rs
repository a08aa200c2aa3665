//! Seeded, reproducible estimation harness: empirical PMFs, two-sample
//! comparisons with defensible error bars, and transition-frequency
//! estimates.
//!
//! Reproducibility contract: replicate `i` draws from a counter-keyed
//! stream derived from `(seed, i)`, so results are bit-identical no matter
//! how replicates are partitioned across workers. `SKELLAMK_THREADS` caps
//! the worker count and affects wall time only.

use crate::analytic::PmfTable;
use crate::error::{Error, Result};
use crate::process::ProcessSpec;
use crate::specfun::reg_gamma_upper;
use crate::trajectories::sample_terminal;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Stream for replicate `i` under master `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

fn worker_count() -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("SKELLAMK_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|n| *n >= 1).unwrap_or(hw).min(64),
        Err(_) => hw.min(64),
    }
}

/// Empirical terminal-value distribution, reproducible from
/// `(spec, t, n_samples, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    pub spec: ProcessSpec,
    pub t: f64,
    pub seed: u64,
    pub n_samples: u64,
    pub counts: BTreeMap<i64, u64>,
}

impl EmpiricalDist {
    pub fn frequency(&self, m: i64) -> f64 {
        *self.counts.get(&m).unwrap_or(&0) as f64 / self.n_samples as f64
    }
}

/// `n_samples` independent terminal values of `spec` at time `t`.
pub fn estimate_pmf(spec: &ProcessSpec, t: f64, n_samples: u64, seed: u64) -> Result<EmpiricalDist> {
    estimate_pmf_with_workers(spec, t, n_samples, seed, worker_count())
}

/// Worker-count-explicit variant; the result does not depend on `workers`.
pub fn estimate_pmf_with_workers(
    spec: &ProcessSpec,
    t: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> Result<EmpiricalDist> {
    spec.validate()?;
    if !spec.is_integer_valued() {
        return Err(Error::UnsupportedFamily {
            family: spec.family_name().into(),
            op: "estimate_pmf (running averages are real-valued; use draw_samples)",
        });
    }
    if n_samples == 0 {
        return Err(Error::domain("estimate_pmf requires n_samples >= 1"));
    }
    let workers = workers.clamp(1, 64).min(n_samples as usize);
    let chunk = n_samples.div_ceil(workers as u64);
    let maps = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers as u64 {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(n_samples);
            let spec = *spec;
            handles.push(scope.spawn(move || -> Result<BTreeMap<i64, u64>> {
                let mut local: BTreeMap<i64, u64> = BTreeMap::new();
                for i in lo..hi {
                    let mut rng = replicate_rng(seed, i);
                    let v = sample_terminal(&spec, t, &mut rng)?;
                    *local.entry(v.round() as i64).or_insert(0) += 1;
                }
                Ok(local)
            }));
        }
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect::<Vec<_>>()
    });
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for m in maps {
        for (k, v) in m? {
            *counts.entry(k).or_insert(0) += v;
        }
    }
    Ok(EmpiricalDist { spec: *spec, t, seed, n_samples, counts })
}

/// `n` replicate-keyed draws of `X(t)` for any family (real-valued output,
/// ordered by replicate index).
pub fn draw_samples(spec: &ProcessSpec, t: f64, n: u64, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let workers = worker_count().clamp(1, 64).min(n.max(1) as usize);
    let chunk = n.div_ceil(workers as u64) as usize;
    let mut out = vec![0.0f64; n as usize];
    let results = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (w, slice) in out.chunks_mut(chunk).enumerate() {
            let spec = *spec;
            let lo = (w * chunk) as u64;
            handles.push(scope.spawn(move || -> Result<()> {
                for (off, slot) in slice.iter_mut().enumerate() {
                    let mut rng = replicate_rng(seed, lo + off as u64);
                    *slot = sample_terminal(&spec, t, &mut rng)?;
                }
                Ok(())
            }));
        }
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect::<Vec<_>>()
    });
    for r in results {
        r?;
    }
    Ok(out)
}

/// Outcome of an empirical-vs-analytic comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Comparison {
    pub tv_distance: f64,
    pub chi2_stat: f64,
    pub chi2_pvalue: f64,
    pub dof: usize,
}

/// Total-variation distance and a chi-square test of `emp` against `table`,
/// with cells pooled to expected count >= 5.
///
/// Locations outside the table window count their full empirical mass
/// toward TV; the table must cover all but `1e-3` of its mass.
pub fn compare(emp: &EmpiricalDist, table: &PmfTable) -> Result<Comparison> {
    table.validate()?;
    if table.truncation_bound > 1e-3 {
        return Err(Error::Coverage { tail: table.truncation_bound });
    }
    let n = emp.n_samples as f64;

    let mut tv = 0.0f64;
    for m in table.m_lo..=table.m_hi {
        tv += (emp.frequency(m) - table.prob_or_zero(m)).abs();
    }
    let mut out_left = 0u64;
    let mut out_right = 0u64;
    for (m, c) in &emp.counts {
        if *m < table.m_lo {
            out_left += c;
        } else if *m > table.m_hi {
            out_right += c;
        }
    }
    tv += (out_left + out_right) as f64 / n;
    tv *= 0.5;

    // pooled chi-square cells over the window
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (expected, observed)
    let mut acc_e = 0.0f64;
    let mut acc_o = 0.0f64;
    for m in table.m_lo..=table.m_hi {
        acc_e += n * table.prob_or_zero(m);
        acc_o += emp.frequency(m) * n;
        if acc_e >= 5.0 {
            cells.push((acc_e, acc_o));
            acc_e = 0.0;
            acc_o = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += acc_e;
            last.1 += acc_o;
        } else {
            cells.push((acc_e, acc_o));
        }
    }
    if cells.len() < 2 {
        return Err(Error::domain("chi-square needs at least two pooled cells"));
    }
    // fold out-of-window observations and the residual expected mass into
    // the edge cells they sit beyond
    let deficit = n * (1.0 - table.total()).max(0.0);
    let (dl, dr) = if out_left + out_right > 0 {
        let share = out_left as f64 / (out_left + out_right) as f64;
        (deficit * share, deficit * (1.0 - share))
    } else {
        (0.0, deficit)
    };
    cells.first_mut().unwrap().0 += dl;
    cells.first_mut().unwrap().1 += out_left as f64;
    cells.last_mut().unwrap().0 += dr;
    cells.last_mut().unwrap().1 += out_right as f64;

    let chi2: f64 = cells.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let pvalue = reg_gamma_upper(dof as f64 / 2.0, chi2 / 2.0);
    Ok(Comparison { tv_distance: tv, chi2_stat: chi2, chi2_pvalue: pvalue, dof })
}

/// Conditional one-step frequencies of `X(t + δ) − X(t)`; by stationary
/// independent increments these are estimated from increments over `δ`
/// directly, so `t` itself does not enter.
pub fn estimate_transition(
    spec: &ProcessSpec,
    _t: f64,
    delta: f64,
    n_samples: u64,
    seed: u64,
) -> Result<BTreeMap<i64, f64>> {
    if !matches!(spec, ProcessSpec::Skellam { .. } | ProcessSpec::Spok { .. }) {
        return Err(Error::UnsupportedFamily {
            family: spec.family_name().into(),
            op: "estimate_transition",
        });
    }
    let emp = estimate_pmf(spec, delta, n_samples, seed)?;
    Ok(emp
        .counts
        .iter()
        .map(|(m, c)| (*m, *c as f64 / n_samples as f64))
        .collect())
}

/// Asymptotic Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{j−1} e^{−2 j² λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    for j in 1..=100 {
        let term = 2.0 * (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks2_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    xb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// One-sample KS test of `xs` against the uniform distribution on [0, 1].
pub fn ks1_uniform_test(xs: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty());
    let mut v = xs.to_vec();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        d = d.max(((i + 1) as f64 / n - x).abs());
        d = d.max((x - i as f64 / n).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// Parametric-bootstrap sampler: `n` draws from the table's own law (after
/// normalizing away its tail deficit), replicate-keyed under `seed`.
pub fn sample_from_table(table: &PmfTable, n: u64, seed: u64) -> Vec<i64> {
    let total = table.total();
    let mut cdf = Vec::with_capacity(table.probs.len());
    let mut acc = 0.0;
    for p in &table.probs {
        acc += p;
        cdf.push(acc);
    }
    (0..n)
        .map(|i| {
            let mut rng = replicate_rng(seed, i);
            let u: f64 = rand::Rng::random::<f64>(&mut rng) * total;
            let idx = cdf.partition_point(|c| *c < u).min(cdf.len() - 1);
            table.m_lo + idx as i64
        })
        .collect()
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance and its standard error (via the fourth central moment).
pub fn variance_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (var, ((m4 - var * var).max(0.0) / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::pmf_table;

    #[test]
    fn estimator_is_deterministic() {
        let spec = ProcessSpec::Skellam { lambda1: 1.0, lambda2: 1.0 };
        let a = estimate_pmf(&spec, 1.0, 5_000, 42).unwrap();
        let b = estimate_pmf(&spec, 1.0, 5_000, 42).unwrap();
        assert_eq!(a, b);
        let c = estimate_pmf(&spec, 1.0, 5_000, 43).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn partitioning_does_not_change_results() {
        let spec = ProcessSpec::Spok { k: 2, lambda1: 1.0, lambda2: 0.5 };
        let a = estimate_pmf_with_workers(&spec, 0.7, 4_001, 9, 1).unwrap();
        let b = estimate_pmf_with_workers(&spec, 0.7, 4_001, 9, 4).unwrap();
        let c = estimate_pmf_with_workers(&spec, 0.7, 4_001, 9, 13).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.counts, c.counts);
    }

    #[test]
    fn single_sample_has_single_entry() {
        let spec = ProcessSpec::Ppok { k: 2, lambda: 1.0 };
        let e = estimate_pmf(&spec, 1.0, 1, 7).unwrap();
        assert_eq!(e.counts.values().sum::<u64>(), 1);
        assert_eq!(e.counts.len(), 1);
    }

    #[test]
    fn counts_sum_to_n_samples() {
        let spec = ProcessSpec::Skellam { lambda1: 2.0, lambda2: 1.0 };
        let e = estimate_pmf(&spec, 1.0, 10_000, 3).unwrap();
        assert_eq!(e.counts.values().sum::<u64>(), 10_000);
    }

    #[test]
    fn empirical_dist_round_trips_through_json() {
        let spec = ProcessSpec::Spok { k: 2, lambda1: 1.0, lambda2: 0.5 };
        let e = estimate_pmf(&spec, 0.7, 2_000, 5).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert!(json.contains("\"counts\""));
        let back: EmpiricalDist = serde_json::from_str(&json).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn skellam_tv_against_analytic_table() {
        let spec = ProcessSpec::Skellam { lambda1: 1.0, lambda2: 1.0 };
        let emp = estimate_pmf(&spec, 1.0, 100_000, 11).unwrap();
        let table = pmf_table(&spec, 1.0, 1e-10).unwrap();
        let cmp = compare(&emp, &table).unwrap();
        assert!(cmp.tv_distance < 0.01, "tv {}", cmp.tv_distance);
        assert!(cmp.chi2_pvalue > 0.01, "p {}", cmp.chi2_pvalue);
    }

    #[test]
    fn standard_errors_shrink_like_inverse_sqrt_n() {
        let spec = ProcessSpec::Skellam { lambda1: 1.0, lambda2: 0.5 };
        let small = draw_samples(&spec, 1.0, 4_000, 21).unwrap();
        let large = draw_samples(&spec, 1.0, 64_000, 22).unwrap();
        let (_, se_small) = mean_se(&small);
        let (_, se_large) = mean_se(&large);
        let ratio = se_small / se_large;
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn bootstrap_pvalues_are_uniform() {
        let spec = ProcessSpec::Skellam { lambda1: 1.0, lambda2: 1.0 };
        let table = pmf_table(&spec, 1.0, 1e-10).unwrap();
        let mut pvals = Vec::new();
        for rep in 0..200u64 {
            let draws = sample_from_table(&table, 5_000, 1000 + rep);
            let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
            for d in draws {
                *counts.entry(d).or_insert(0) += 1;
            }
            let emp = EmpiricalDist { spec, t: 1.0, seed: 1000 + rep, n_samples: 5_000, counts };
            pvals.push(compare(&emp, &table).unwrap().chi2_pvalue);
        }
        let (_, p) = ks1_uniform_test(&pvals);
        assert!(p > 0.01, "KS-vs-uniform p = {p}");
    }

    #[test]
    fn spok_comparison_sides_with_convolution() {
        // the documented closed-form discrepancy at k = 2
        let spec = ProcessSpec::Spok { k: 2, lambda1: 1.0, lambda2: 1.0 };
        let t = 0.5;
        let emp = estimate_pmf(&spec, t, 100_000, 5).unwrap();
        let conv = pmf_table(&spec, t, 1e-10).unwrap();
        let cmp = compare(&emp, &conv).unwrap();
        assert!(cmp.chi2_pvalue > 0.01, "conv p = {}", cmp.chi2_pvalue);

        let mut closed = conv.clone();
        for (i, m) in (closed.m_lo..=closed.m_hi).enumerate() {
            closed.probs[i] =
                crate::analytic::spok_pmf_closedform(2, 1.0, 1.0, t, m).unwrap();
        }
        closed.truncation_bound = (1.0 - closed.total()).max(0.0);
        let cmp = compare(&emp, &closed).unwrap();
        assert!(cmp.chi2_pvalue < 1e-6, "closed-form p = {}", cmp.chi2_pvalue);
    }

    #[test]
    fn order_one_terminal_is_poisson() {
        let spec = ProcessSpec::Ppok { k: 1, lambda: 1.3 };
        let emp = estimate_pmf(&spec, 1.0, 100_000, 29).unwrap();
        let table = pmf_table(&spec, 1.0, 1e-10).unwrap();
        let cmp = compare(&emp, &table).unwrap();
        assert!(cmp.chi2_pvalue > 0.01, "p = {}", cmp.chi2_pvalue);
    }

    #[test]
    fn degenerate_subordinator_concentrates_on_inner_process() {
        // gamma(p, α = p) pins D(t) near t as p grows, so the time-changed
        // terminal law approaches the inner one
        use crate::subordinators::SubordinatorSpec;
        let inner = ProcessSpec::Spok { k: 2, lambda1: 1.0, lambda2: 1.0 };
        let table = pmf_table(&inner, 1.0, 1e-10).unwrap();
        let mut tvs = Vec::new();
        for &p in &[10.0, 100.0] {
            let spec = ProcessSpec::TimeChangedSpok {
                k: 2,
                lambda1: 1.0,
                lambda2: 1.0,
                subordinator: SubordinatorSpec::Gamma { p, alpha: p },
            };
            let emp = estimate_pmf(&spec, 1.0, 40_000, 31).unwrap();
            // reuse the inner table's window for the comparison
            let mut inner_table = table.clone();
            inner_table.spec = spec;
            tvs.push(compare(&emp, &inner_table).unwrap().tv_distance);
        }
        assert!(tvs[1] < tvs[0], "TV did not shrink: {tvs:?}");
    }

    #[test]
    fn transition_frequencies_match_rates() {
        let spec = ProcessSpec::Skellam { lambda1: 1.0, lambda2: 2.0 };
        let delta = 1e-2;
        let n = 400_000u64;
        let freq = estimate_transition(&spec, 1.0, delta, n, 17).unwrap();
        let se = |p: f64| (p * (1.0 - p) / n as f64).sqrt();
        let up = freq.get(&1).copied().unwrap_or(0.0);
        assert!((up - delta).abs() < 4.0 * se(delta) + 10.0 * delta * delta, "up {up}");
        let down = freq.get(&-1).copied().unwrap_or(0.0);
        assert!((down - 2.0 * delta).abs() < 4.0 * se(2.0 * delta) + 10.0 * delta * delta);
        let stay = freq.get(&0).copied().unwrap_or(0.0);
        let expect = 1.0 - 3.0 * delta;
        assert!((stay - expect).abs() < 4.0 * se(expect) + 10.0 * delta * delta);
    }

    #[test]
    fn ks_tests_behave() {
        // identical samples: D = 0, p = 1
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (d, p) = ks2_test(&xs, &xs);
        assert_eq!(d, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        // clearly different samples reject
        let ys: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
        let (_, p) = ks2_test(&xs, &ys);
        assert!(p < 1e-4);
    }

    #[test]
    fn coverage_gate_rejects_leaky_tables() {
        let spec = ProcessSpec::Skellam { lambda1: 1.0, lambda2: 1.0 };
        let emp = estimate_pmf(&spec, 1.0, 1_000, 1).unwrap();
        let mut table = pmf_table(&spec, 1.0, 1e-10).unwrap();
        table.truncation_bound = 0.5;
        // shrink recorded mass so the doctored bound stays self-consistent
        for p in table.probs.iter_mut() {
            *p *= 0.5;
        }
        assert!(matches!(compare(&emp, &table), Err(Error::Coverage { .. })));
    }
}
