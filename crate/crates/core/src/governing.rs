//! Fractional and integer difference operators, and residual checks that
//! the computed PMFs satisfy their governing difference-differential
//! equations.
//!
//! The backward operator is `(1−B)^α = Σ_j (α choose j)(−1)^j B^j` with
//! `B^j p(m) = p(m−j)`; the forward operator mirrors it with
//! `F^j p(m) = p(m+j)`.

use crate::analytic::{self, PmfTable};
use crate::error::{Error, Result};
use crate::process::ProcessSpec;
use crate::specfun::gen_binomial;

/// Operator truncation used by the residual checks.
const OPERATOR_TRUNCATION: u32 = 200;
/// Series tolerance for the tables the residual checks build.
const TABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    Backward,
    Forward,
}

/// Fractional difference operator `(1−B)^α` or `(1−F)^α`, truncated.
#[derive(Debug, Clone, Copy)]
pub struct FracDiffSpec {
    pub order: f64,
    pub direction: ShiftDirection,
    pub truncation: u32,
}

impl FracDiffSpec {
    pub fn backward(order: f64, truncation: u32) -> Self {
        FracDiffSpec { order, direction: ShiftDirection::Backward, truncation }
    }

    pub fn forward(order: f64, truncation: u32) -> Self {
        FracDiffSpec { order, direction: ShiftDirection::Forward, truncation }
    }

    fn validate(&self) -> Result<()> {
        if !(self.order > 0.0 && self.order <= 1.0) {
            return Err(Error::domain(format!(
                "fractional order must lie in (0, 1], got {}",
                self.order
            )));
        }
        if self.truncation < 1 {
            return Err(Error::domain("operator truncation must be >= 1"));
        }
        Ok(())
    }
}

/// `Σ_{j=0..truncation} (α choose j)(−1)^j p(m ∓ j)`; the table window must
/// cover every shifted location.
pub fn frac_diff(op: &FracDiffSpec, pmf: &PmfTable, m: i64) -> Result<f64> {
    op.validate()?;
    let mut acc = 0.0f64;
    for j in 0..=op.truncation {
        let loc = match op.direction {
            ShiftDirection::Backward => m - j as i64,
            ShiftDirection::Forward => m + j as i64,
        };
        let p = pmf.prob(loc).ok_or_else(|| {
            Error::Support(format!(
                "frac_diff at m = {m} needs location {loc}, window is [{}, {}]",
                pmf.m_lo, pmf.m_hi
            ))
        })?;
        let coeff = gen_binomial(op.order, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += coeff * p;
    }
    Ok(acc)
}

/// Operator window each family's right side needs, as (below, above).
fn operator_reach(spec: &ProcessSpec) -> Result<(i64, i64)> {
    Ok(match *spec {
        ProcessSpec::Skellam { .. } => (1, 1),
        ProcessSpec::Ppok { k, .. } => (k as i64, 0),
        ProcessSpec::Spok { k, .. } => (k as i64, k as i64),
        ProcessSpec::Sfpp { .. } | ProcessSpec::Tsfpp { .. } => (OPERATOR_TRUNCATION as i64, 0),
        ProcessSpec::Sfsp { .. } => (OPERATOR_TRUNCATION as i64, OPERATOR_TRUNCATION as i64),
        _ => {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name().into(),
                op: "governing_residual (no stated governing equation)",
            })
        }
    })
}

fn rhs(spec: &ProcessSpec, table: &PmfTable, m: i64) -> Result<f64> {
    Ok(match *spec {
        ProcessSpec::Skellam { lambda1, lambda2 } => {
            let p = |x: i64| table.prob_or_zero(x);
            lambda1 * (p(m - 1) - p(m)) - lambda2 * (p(m) - p(m + 1))
        }
        ProcessSpec::Ppok { k, lambda } => {
            // summand index is p_{n−j}; a p_{n−k} variant (no j dependence)
            // fails this very residual check
            let p = |x: i64| table.prob_or_zero(x);
            let mut acc = -(k as f64) * lambda * p(m);
            for j in 1..=(k as i64).min(m.max(0)) {
                acc += lambda * p(m - j);
            }
            acc
        }
        ProcessSpec::Spok { k, lambda1, lambda2 } => {
            let p = |x: i64| table.prob_or_zero(x);
            let mut acc = -(k as f64) * (lambda1 + lambda2) * p(m);
            for j in 1..=k as i64 {
                acc += lambda1 * p(m - j) + lambda2 * p(m + j);
            }
            acc
        }
        ProcessSpec::Sfpp { alpha, lambda } => {
            let op = FracDiffSpec::backward(alpha, OPERATOR_TRUNCATION);
            -lambda.powf(alpha) * frac_diff(&op, table, m)?
        }
        ProcessSpec::Tsfpp { alpha, mu, lambda } => {
            // −((μ + λ(1−B))^α − μ^α) expanded through the Lévy atoms:
            // total mass (μ+λ)^α − μ^α out, atom mass back in from below
            let total = (mu + lambda).powf(alpha) - mu.powf(alpha);
            let atoms = analytic::levy_measure(spec, OPERATOR_TRUNCATION)?;
            let mut acc = -total * table.prob_or_zero(m);
            for (l, mass) in &atoms.atoms {
                acc += mass * table.prob_or_zero(m - l);
            }
            acc
        }
        ProcessSpec::Sfsp { alpha1, alpha2, lambda1, lambda2 } => {
            let back = FracDiffSpec::backward(alpha1, OPERATOR_TRUNCATION);
            let fwd = FracDiffSpec::forward(alpha2, OPERATOR_TRUNCATION);
            -lambda1.powf(alpha1) * frac_diff(&back, table, m)?
                - lambda2.powf(alpha2) * frac_diff(&fwd, table, m)?
        }
        _ => unreachable!("operator_reach gates the families"),
    })
}

/// Max absolute residual of `d/dt p_m(t) = (generator p)(m)` over the
/// window, with the time derivative taken by central differences and one
/// Richardson level.
pub fn governing_residual(
    spec: &ProcessSpec,
    t: f64,
    dt: f64,
    window: (i64, i64),
) -> Result<f64> {
    spec.validate()?;
    if !(t > 0.0 && dt > 0.0 && t - dt > 0.0) {
        return Err(Error::domain(format!(
            "governing_residual requires 0 < dt < t, got t = {t}, dt = {dt}"
        )));
    }
    if window.1 < window.0 {
        return Err(Error::domain("empty residual window"));
    }
    let (below, above) = operator_reach(spec)?;
    let lo = window.0 - below;
    let hi = window.1 + above;
    let build = |tt: f64| analytic::pmf_table_windowed(spec, tt, lo, hi, TABLE_TOL);
    let p_m2 = build(t - dt)?;
    let p_m1 = build(t - dt / 2.0)?;
    let p_p1 = build(t + dt / 2.0)?;
    let p_p2 = build(t + dt)?;
    let p_0 = build(t)?;

    let mut worst = 0.0f64;
    for m in window.0..=window.1 {
        let d1 = (p_p2.prob_or_zero(m) - p_m2.prob_or_zero(m)) / (2.0 * dt);
        let d2 = (p_p1.prob_or_zero(m) - p_m1.prob_or_zero(m)) / dt;
        let lhs = (4.0 * d2 - d1) / 3.0;
        let r = (lhs - rhs(spec, &p_0, m)?).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta_table(radius: i64) -> PmfTable {
        let mut probs = vec![0.0; (2 * radius + 1) as usize];
        probs[radius as usize] = 1.0;
        PmfTable {
            spec: ProcessSpec::Skellam { lambda1: 1.0, lambda2: 1.0 },
            t: 1.0,
            m_lo: -radius,
            m_hi: radius,
            probs,
            truncation_bound: 0.0,
            clamped: 0,
        }
    }

    #[test]
    fn integer_order_backward_is_first_difference() {
        let table = delta_table(5);
        let op = FracDiffSpec::backward(1.0, 1);
        // p(m) − p(m−1) on the delta sequence
        assert_eq!(frac_diff(&op, &table, 0).unwrap(), 1.0);
        assert_eq!(frac_diff(&op, &table, 1).unwrap(), -1.0);
        assert_eq!(frac_diff(&op, &table, 3).unwrap(), 0.0);
    }

    #[test]
    fn half_order_on_delta_gives_binomial_coefficient() {
        let table = delta_table(5);
        let op = FracDiffSpec::backward(0.5, 4);
        // coefficient at lag 2: (0.5 choose 2)(−1)^2 = −0.125
        let got = frac_diff(&op, &table, 2).unwrap();
        assert!((got - (-0.125)).abs() < 1e-15);
    }

    #[test]
    fn forward_on_constant_sequence_vanishes_at_unit_order() {
        let mut table = delta_table(6);
        for p in table.probs.iter_mut() {
            *p = 0.05;
        }
        let op = FracDiffSpec::forward(1.0, 1);
        assert!(frac_diff(&op, &table, 0).unwrap().abs() < 1e-16);
    }

    #[test]
    fn support_error_when_window_too_small() {
        let table = delta_table(2);
        let op = FracDiffSpec::backward(0.5, 10);
        assert!(matches!(frac_diff(&op, &table, 0), Err(Error::Support(_))));
    }

    #[test]
    fn skellam_residual_is_small() {
        let spec = ProcessSpec::Skellam { lambda1: 1.0, lambda2: 1.0 };
        let r = governing_residual(&spec, 1.0, 1e-4, (-10, 10)).unwrap();
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn ppok_residual_with_corrected_index() {
        let spec = ProcessSpec::Ppok { k: 3, lambda: 1.0 };
        let r = governing_residual(&spec, 1.0, 1e-4, (0, 15)).unwrap();
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn ppok_residual_with_constant_index_fails() {
        // a summand fixed at p_{n−k} (no j dependence) does not satisfy the
        // system
        let spec = ProcessSpec::Ppok { k: 3, lambda: 1.0 };
        let t = 1.0;
        let dt = 1e-4;
        let table = analytic::pmf_table_windowed(&spec, t, -3, 15, 1e-12).unwrap();
        let plus = analytic::pmf_table_windowed(&spec, t + dt, -3, 15, 1e-12).unwrap();
        let minus = analytic::pmf_table_windowed(&spec, t - dt, -3, 15, 1e-12).unwrap();
        let mut worst = 0.0f64;
        for n in 1..=10i64 {
            let lhs = (plus.prob_or_zero(n) - minus.prob_or_zero(n)) / (2.0 * dt);
            let count = 3.min(n) as f64;
            let fixed_lag_rhs = -3.0 * table.prob_or_zero(n) + count * table.prob_or_zero(n - 3);
            worst = worst.max((lhs - fixed_lag_rhs).abs());
        }
        assert!(worst > 1e-2, "fixed-lag form unexpectedly close: {worst}");
    }

    #[test]
    fn spok_residual_uses_convolution_pmf() {
        let spec = ProcessSpec::Spok { k: 2, lambda1: 1.0, lambda2: 0.5 };
        let r = governing_residual(&spec, 1.0, 1e-4, (-8, 8)).unwrap();
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn initial_condition_concentrates_at_zero() {
        for spec in [
            ProcessSpec::Skellam { lambda1: 1.0, lambda2: 1.0 },
            ProcessSpec::Ppok { k: 3, lambda: 1.0 },
            ProcessSpec::Sfpp { alpha: 0.7, lambda: 1.0 },
        ] {
            let table = analytic::pmf_table_windowed(&spec, 1e-8, -5, 5, 1e-12).unwrap();
            assert!(table.prob_or_zero(0) >= 1.0 - 1e-6, "{spec:?}");
        }
    }

    #[test]
    fn unsupported_families_are_rejected() {
        let spec = ProcessSpec::RunningAvgPpok { k: 2, lambda: 1.0 };
        assert!(matches!(
            governing_residual(&spec, 1.0, 1e-4, (0, 5)),
            Err(Error::UnsupportedFamily { .. })
        ));
    }
}
