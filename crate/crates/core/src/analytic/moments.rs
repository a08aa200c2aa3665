//! Closed-form moments, covariances, correlations, and the long-range
//! dependence limits.
//!
//! Two covariance conventions exist for the running averages: the stated
//! closed forms kept here do not reduce to their own variances at `s = t`,
//! while the pathwise-integral form ([`running_avg_cov_pathwise`]) does;
//! the Monte Carlo harness reports which side the samples take.

use crate::error::{Error, Result};
use crate::process::ProcessSpec;

fn triangular(k: u32) -> f64 {
    let kf = k as f64;
    kf * (kf + 1.0) / 2.0
}

fn square_pyramidal(k: u32) -> f64 {
    let kf = k as f64;
    kf * (kf + 1.0) * (2.0 * kf + 1.0) / 6.0
}

fn tsfpp_mean_var(alpha: f64, mu: f64, lambda: f64, t: f64) -> (f64, f64) {
    let mean = lambda * alpha * mu.powf(alpha - 1.0) * t;
    let var = mean + lambda * lambda * alpha * (1.0 - alpha) * mu.powf(alpha - 2.0) * t;
    (mean, var)
}

/// Mean and variance of `X(t)` for every family with finite moments.
pub fn moments(spec: &ProcessSpec, t: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("moments require t > 0, got {t}")));
    }
    Ok(match *spec {
        ProcessSpec::Skellam { lambda1, lambda2 } => {
            ((lambda1 - lambda2) * t, (lambda1 + lambda2) * t)
        }
        ProcessSpec::Ppok { k, lambda } => {
            (triangular(k) * lambda * t, square_pyramidal(k) * lambda * t)
        }
        ProcessSpec::Spok { k, lambda1, lambda2 } => (
            triangular(k) * (lambda1 - lambda2) * t,
            square_pyramidal(k) * (lambda1 + lambda2) * t,
        ),
        ProcessSpec::RunningAvgPpok { k, lambda } => (
            triangular(k) * lambda * t / 2.0,
            square_pyramidal(k) * lambda * t / 3.0,
        ),
        ProcessSpec::RunningAvgSpok { k, lambda1, lambda2 } => (
            triangular(k) * (lambda1 - lambda2) * t / 2.0,
            square_pyramidal(k) * (lambda1 + lambda2) * t / 3.0,
        ),
        ProcessSpec::Tsfpp { alpha, mu, lambda } => tsfpp_mean_var(alpha, mu, lambda, t),
        ProcessSpec::Tsfsp { alpha1, mu1, alpha2, mu2, lambda1, lambda2 } => {
            let (m1, v1) = tsfpp_mean_var(alpha1, mu1, lambda1, t);
            let (m2, v2) = tsfpp_mean_var(alpha2, mu2, lambda2, t);
            (m1 - m2, v1 + v2)
        }
        ProcessSpec::TimeChangedSpok { k, lambda1, lambda2, subordinator } => {
            let (ed, vd) = subordinator.moments(t)?;
            let cm = triangular(k) * (lambda1 - lambda2);
            let cv = square_pyramidal(k) * (lambda1 + lambda2);
            (cm * ed, cv * ed + cm * cm * vd)
        }
        ProcessSpec::Sfpp { alpha, lambda } => {
            if alpha == 1.0 {
                (lambda * t, lambda * t)
            } else {
                return Err(Error::UnsupportedFamily {
                    family: spec.family_name().into(),
                    op: "moments (stable subordination makes them infinite)",
                });
            }
        }
        ProcessSpec::Sfsp { alpha1, alpha2, lambda1, lambda2 } => {
            if alpha1 == 1.0 && alpha2 == 1.0 {
                ((lambda1 - lambda2) * t, (lambda1 + lambda2) * t)
            } else {
                return Err(Error::UnsupportedFamily {
                    family: spec.family_name().into(),
                    op: "moments (stable subordination makes them infinite)",
                });
            }
        }
    })
}

/// `Cov[X(s), X(t)]` for `s <= t`, evaluated by the family's stated closed
/// form.
pub fn covariance(spec: &ProcessSpec, s: f64, t: f64) -> Result<f64> {
    spec.validate()?;
    if !(s > 0.0 && s <= t) {
        return Err(Error::domain(format!("covariance requires 0 < s <= t, got s={s}, t={t}")));
    }
    Ok(match *spec {
        ProcessSpec::Skellam { lambda1, lambda2 } => (lambda1 + lambda2) * s,
        ProcessSpec::Ppok { k, lambda } => square_pyramidal(k) * lambda * s,
        ProcessSpec::Spok { k, lambda1, lambda2 } => {
            square_pyramidal(k) * (lambda1 + lambda2) * s
        }
        // stated form; it disagrees with its own variance at s = t, see
        // the harness's discrepancy report
        ProcessSpec::RunningAvgPpok { k, lambda } => {
            let kf = k as f64;
            square_pyramidal(k) * lambda * s / 3.0
                - kf * kf * (kf + 1.0) * (kf + 1.0) * lambda * lambda * s * s / 16.0
        }
        ProcessSpec::RunningAvgSpok { k, lambda1, lambda2 } => {
            let kf = k as f64;
            let d = lambda1 - lambda2;
            square_pyramidal(k) * d * s / 3.0
                - kf * kf * (kf + 1.0) * (kf + 1.0) * d * d * s * s / 16.0
        }
        ProcessSpec::Tsfpp { alpha, mu, lambda } => tsfpp_mean_var(alpha, mu, lambda, s).1,
        ProcessSpec::Tsfsp { alpha1, mu1, alpha2, mu2, lambda1, lambda2 } => {
            tsfpp_mean_var(alpha1, mu1, lambda1, s).1 + tsfpp_mean_var(alpha2, mu2, lambda2, s).1
        }
        ProcessSpec::TimeChangedSpok { k, lambda1, lambda2, subordinator } => {
            let (ed, vd) = subordinator.moments(s)?;
            let cm = triangular(k) * (lambda1 - lambda2);
            let cv = square_pyramidal(k) * (lambda1 + lambda2);
            cv * ed + cm * cm * vd
        }
        ProcessSpec::Sfpp { .. } | ProcessSpec::Sfsp { .. } => {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name().into(),
                op: "covariance",
            })
        }
    })
}

/// Covariance of the running average derived from the pathwise integral of
/// the underlying Lévy process: `Cov = σ² s (3t − s) / (6t)` for `s <= t`,
/// where `σ²` is the underlying variance rate. This is the form the Monte
/// Carlo sides with; the stated covariance above does not reduce to the
/// variance at `s = t`.
pub fn running_avg_cov_pathwise(spec: &ProcessSpec, s: f64, t: f64) -> Result<f64> {
    spec.validate()?;
    if !(s > 0.0 && s <= t) {
        return Err(Error::domain(format!("requires 0 < s <= t, got s={s}, t={t}")));
    }
    let rate = match *spec {
        ProcessSpec::RunningAvgPpok { k, lambda } => square_pyramidal(k) * lambda,
        ProcessSpec::RunningAvgSpok { k, lambda1, lambda2 } => {
            square_pyramidal(k) * (lambda1 + lambda2)
        }
        _ => {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name().into(),
                op: "running_avg_cov_pathwise",
            })
        }
    };
    Ok(rate * s * (3.0 * t - s) / (6.0 * t))
}

/// Correlation for the families with a stated correlation function.
pub fn correlation(spec: &ProcessSpec, s: f64, t: f64) -> Result<f64> {
    spec.validate()?;
    if !(s > 0.0 && s < t) {
        return Err(Error::domain(format!("correlation requires 0 < s < t, got s={s}, t={t}")));
    }
    Ok(match *spec {
        ProcessSpec::Spok { .. } => (s / t).sqrt(),
        ProcessSpec::RunningAvgPpok { .. } => {
            let cov = covariance(spec, s, t)?;
            let (_, vs) = moments(spec, s)?;
            let (_, vt) = moments(spec, t)?;
            cov / (vs * vt).sqrt()
        }
        _ => {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name().into(),
                op: "correlation",
            })
        }
    })
}

/// `c(s) = lim_{t→∞} t^d · Cor(X(t), X(s))` at the decay index `d = 1/2`,
/// evaluated symbolically per family.
pub fn lrd_limit(spec: &ProcessSpec, s: f64, d: f64) -> Result<f64> {
    spec.validate()?;
    if (d - 0.5).abs() > 1e-12 {
        return Err(Error::domain(format!("lrd_limit is stated at d = 1/2, got {d}")));
    }
    if !(s > 0.0) {
        return Err(Error::domain(format!("lrd_limit requires s > 0, got {s}")));
    }
    Ok(match *spec {
        ProcessSpec::Spok { .. } => s.sqrt(),
        ProcessSpec::RunningAvgPpok { k, lambda } => {
            let kf = k as f64;
            (8.0 * (2.0 * kf + 1.0) - 9.0 * (kf + 1.0) * kf * lambda * s) * s.sqrt()
                / (8.0 * (2.0 * kf + 1.0))
        }
        _ => {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name().into(),
                op: "lrd_limit",
            })
        }
    })
}
