//! Tagged description of every process family the toolkit handles.

use crate::error::{Error, Result};
use crate::subordinators::SubordinatorSpec;
use serde::{Deserialize, Serialize};

/// A process family together with its parameters.
///
/// `lambda2 = 0` is permitted only for the Skellam-type families, where it
/// reduces the process to its one-sided counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProcessSpec {
    Skellam { lambda1: f64, lambda2: f64 },
    Ppok { k: u32, lambda: f64 },
    Spok { k: u32, lambda1: f64, lambda2: f64 },
    RunningAvgPpok { k: u32, lambda: f64 },
    RunningAvgSpok { k: u32, lambda1: f64, lambda2: f64 },
    Sfpp { alpha: f64, lambda: f64 },
    Tsfpp { alpha: f64, mu: f64, lambda: f64 },
    Sfsp { alpha1: f64, alpha2: f64, lambda1: f64, lambda2: f64 },
    Tsfsp { alpha1: f64, mu1: f64, alpha2: f64, mu2: f64, lambda1: f64, lambda2: f64 },
    TimeChangedSpok { k: u32, lambda1: f64, lambda2: f64, subordinator: SubordinatorSpec },
}

fn frac_ok(a: f64) -> bool {
    a > 0.0 && a <= 1.0
}

impl ProcessSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ProcessSpec::Skellam { .. } => "skellam",
            ProcessSpec::Ppok { .. } => "ppok",
            ProcessSpec::Spok { .. } => "spok",
            ProcessSpec::RunningAvgPpok { .. } => "ppok-avg",
            ProcessSpec::RunningAvgSpok { .. } => "spok-avg",
            ProcessSpec::Sfpp { .. } => "sfpp",
            ProcessSpec::Tsfpp { .. } => "tsfpp",
            ProcessSpec::Sfsp { .. } => "sfsp",
            ProcessSpec::Tsfsp { .. } => "tsfsp",
            ProcessSpec::TimeChangedSpok { .. } => "tcspok",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ProcessSpec::Skellam { lambda1, lambda2 } => lambda1 > 0.0 && lambda2 >= 0.0,
            ProcessSpec::Ppok { k, lambda } => k >= 1 && lambda > 0.0,
            ProcessSpec::Spok { k, lambda1, lambda2 }
            | ProcessSpec::RunningAvgSpok { k, lambda1, lambda2 } => {
                k >= 1 && lambda1 > 0.0 && lambda2 >= 0.0
            }
            ProcessSpec::RunningAvgPpok { k, lambda } => k >= 1 && lambda > 0.0,
            ProcessSpec::Sfpp { alpha, lambda } => frac_ok(alpha) && lambda > 0.0,
            ProcessSpec::Tsfpp { alpha, mu, lambda } => frac_ok(alpha) && mu > 0.0 && lambda > 0.0,
            ProcessSpec::Sfsp { alpha1, alpha2, lambda1, lambda2 } => {
                frac_ok(alpha1) && frac_ok(alpha2) && lambda1 > 0.0 && lambda2 > 0.0
            }
            ProcessSpec::Tsfsp { alpha1, mu1, alpha2, mu2, lambda1, lambda2 } => {
                frac_ok(alpha1)
                    && frac_ok(alpha2)
                    && mu1 > 0.0
                    && mu2 > 0.0
                    && lambda1 > 0.0
                    && lambda2 > 0.0
            }
            ProcessSpec::TimeChangedSpok { k, lambda1, lambda2, subordinator } => {
                subordinator.validate()?;
                k >= 1 && lambda1 > 0.0 && lambda2 >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid process parameters: {self:?}")))
        }
    }

    /// True for the families whose marginals live on the integers.
    pub fn is_integer_valued(&self) -> bool {
        !matches!(self, ProcessSpec::RunningAvgPpok { .. } | ProcessSpec::RunningAvgSpok { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_accepts_reduction_cases() {
        assert!(ProcessSpec::Skellam { lambda1: 1.0, lambda2: 0.0 }.validate().is_ok());
        assert!(ProcessSpec::Spok { k: 2, lambda1: 1.0, lambda2: 0.0 }.validate().is_ok());
        assert!(ProcessSpec::Sfpp { alpha: 1.0, lambda: 1.0 }.validate().is_ok());
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(ProcessSpec::Ppok { k: 0, lambda: 1.0 }.validate().is_err());
        assert!(ProcessSpec::Sfpp { alpha: 1.2, lambda: 1.0 }.validate().is_err());
        assert!(ProcessSpec::Tsfpp { alpha: 0.5, mu: 0.0, lambda: 1.0 }.validate().is_err());
        assert!(ProcessSpec::Skellam { lambda1: 0.0, lambda2: 1.0 }.validate().is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let specs = [
            ProcessSpec::Skellam { lambda1: 1.0, lambda2: 2.0 },
            ProcessSpec::Spok { k: 3, lambda1: 0.5, lambda2: 0.25 },
            ProcessSpec::TimeChangedSpok {
                k: 2,
                lambda1: 1.0,
                lambda2: 1.0,
                subordinator: SubordinatorSpec::Gamma { p: 2.0, alpha: 3.0 },
            },
        ];
        for s in specs {
            let json = serde_json::to_string(&s).unwrap();
            let back: ProcessSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(s, back);
        }
    }
}
