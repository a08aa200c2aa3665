//! Closed-form distributional objects for every family: PMFs, generating
//! functions, moments and covariances, Lévy measures, and characteristic
//! exponents.

mod levy;
mod moments;
mod pmf;

pub use levy::{
    char_exponent, levy_khintchine_residual, levy_measure, sfsp_mgf_exponent,
    tcspok_pmf_definitional, tsfsp_mgf,
};
pub use moments::{
    correlation, covariance, lrd_limit, moments, running_avg_cov_pathwise,
};
pub use pmf::{
    poisson_pmf, ppok_pmf, ppok_pmf_enumerate, ppok_pmf_vec, sfpp_pmf, sfpp_pmf_recursion,
    sfsp_pmf, skellam_pmf, spok_pgf, spok_pmf_closedform, spok_pmf_conv, tcspok_pmf,
    tcspok_pmf_series, tsfpp_pmf, tsfsp_pmf,
};

use crate::error::{Error, Result};
use crate::process::ProcessSpec;
use serde::{Deserialize, Serialize};

/// Negative probabilities above this magnitude are an error; smaller ones are
/// rounding debris from alternating series and get clamped to zero.
const NEG_CLAMP: f64 = 1e-12;

/// Finite window of an integer-supported PMF.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PmfTable {
    pub spec: ProcessSpec,
    pub t: f64,
    pub m_lo: i64,
    pub m_hi: i64,
    pub probs: Vec<f64>,
    pub truncation_bound: f64,
    /// How many entries were clamped up from tiny negative values.
    #[serde(skip, default)]
    pub clamped: usize,
}

impl PartialEq for PmfTable {
    fn eq(&self, other: &Self) -> bool {
        // clamp bookkeeping is diagnostic, not part of the value
        self.spec == other.spec
            && self.t == other.t
            && self.m_lo == other.m_lo
            && self.m_hi == other.m_hi
            && self.probs == other.probs
            && self.truncation_bound == other.truncation_bound
    }
}

impl PmfTable {
    /// Probability at `m`, or `None` outside the window.
    pub fn prob(&self, m: i64) -> Option<f64> {
        if m < self.m_lo || m > self.m_hi {
            None
        } else {
            Some(self.probs[(m - self.m_lo) as usize])
        }
    }

    /// Probability at `m` with locations outside the window read as 0.
    /// The omitted mass is bounded by `truncation_bound`.
    pub fn prob_or_zero(&self, m: i64) -> f64 {
        self.prob(m).unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> {
        self.m_lo..=self.m_hi
    }

    /// Check the table's own consistency contract.
    pub fn validate(&self) -> Result<()> {
        if self.probs.len() != (self.m_hi - self.m_lo + 1) as usize {
            return Err(Error::domain("pmf table window/probs length mismatch"));
        }
        if self.probs.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(Error::domain("pmf table has negative or non-finite entries"));
        }
        let total = self.total();
        if total > 1.0 + 1e-9 {
            return Err(Error::domain(format!("pmf table mass {total} exceeds 1")));
        }
        if total + self.truncation_bound < 1.0 - 1e-9 {
            return Err(Error::domain(format!(
                "pmf table mass {total} + bound {} below 1",
                self.truncation_bound
            )));
        }
        Ok(())
    }
}

/// Atomic Lévy measure: point masses at nonzero integers, plus a bound on
/// the Lévy–Khintchine residual contributed by omitted atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyMeasure {
    pub atoms: Vec<(i64, f64)>,
    pub truncation_bound: f64,
}

impl LevyMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    pub fn mass_at(&self, location: i64) -> f64 {
        self.atoms.iter().find(|(l, _)| *l == location).map(|(_, m)| *m).unwrap_or(0.0)
    }
}

fn clamp_probs(probs: &mut [f64]) -> Result<usize> {
    let mut clamped = 0usize;
    for p in probs.iter_mut() {
        if *p < 0.0 {
            if *p < -NEG_CLAMP {
                return Err(Error::domain(format!("negative probability {p} beyond slack")));
            }
            *p = 0.0;
            clamped += 1;
        }
    }
    Ok(clamped)
}

/// Pointwise PMF evaluation for any integer-valued family.
pub fn pmf_point(spec: &ProcessSpec, t: f64, m: i64, tol: f64) -> Result<f64> {
    spec.validate()?;
    match *spec {
        ProcessSpec::Skellam { lambda1, lambda2 } => skellam_pmf(lambda1, lambda2, t, m),
        ProcessSpec::Ppok { k, lambda } => Ok(ppok_pmf(k, lambda, t, m)),
        ProcessSpec::Spok { k, lambda1, lambda2 } => Ok(spok_pmf_conv(k, lambda1, lambda2, t, m, tol)),
        ProcessSpec::Sfpp { alpha, lambda } => sfpp_pmf(alpha, lambda, t, m, tol),
        ProcessSpec::Tsfpp { alpha, mu, lambda } => tsfpp_pmf(alpha, mu, lambda, t, m, tol),
        ProcessSpec::Sfsp { alpha1, alpha2, lambda1, lambda2 } => {
            sfsp_pmf(alpha1, alpha2, lambda1, lambda2, t, m, tol)
        }
        ProcessSpec::Tsfsp { alpha1, mu1, alpha2, mu2, lambda1, lambda2 } => {
            tsfsp_pmf(alpha1, mu1, alpha2, mu2, lambda1, lambda2, t, m, tol)
        }
        ProcessSpec::TimeChangedSpok { k, lambda1, lambda2, subordinator } => {
            tcspok_pmf(k, lambda1, lambda2, &subordinator, t, m, tol)
        }
        ProcessSpec::RunningAvgPpok { .. } | ProcessSpec::RunningAvgSpok { .. } => {
            Err(Error::UnsupportedFamily { family: spec.family_name().into(), op: "pmf_point" })
        }
    }
}

fn window_from_moments(spec: &ProcessSpec, t: f64) -> Option<(i64, i64)> {
    let (mean, var) = moments(spec, t).ok()?;
    let half = (8.0 * var.sqrt()).ceil().max(10.0) as i64;
    let center = mean.round() as i64;
    Some((center - half, center + half))
}

fn one_sided(spec: &ProcessSpec) -> bool {
    matches!(
        spec,
        ProcessSpec::Ppok { .. } | ProcessSpec::Sfpp { .. } | ProcessSpec::Tsfpp { .. }
    )
}

/// Build a PMF table over an automatically selected window: centered at the
/// rounded mean with half-width `max(10, ceil(8σ))` when moments exist,
/// widened until the mass deficit drops below `tol` (or a hard cap for
/// heavy-tailed families, with the honest deficit recorded).
pub fn pmf_table(spec: &ProcessSpec, t: f64, tol: f64) -> Result<PmfTable> {
    spec.validate()?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("pmf_table requires t > 0, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("pmf_table requires tol > 0, got {tol}")));
    }
    let (mut lo, mut hi) = match window_from_moments(spec, t) {
        Some(w) => w,
        None => (-64, 64),
    };
    if one_sided(spec) {
        lo = lo.max(0);
    }
    const CAP: i64 = 1 << 20;
    loop {
        let table = pmf_table_windowed(spec, t, lo, hi, tol)?;
        if table.truncation_bound < tol || (hi - lo) >= CAP {
            return Ok(table);
        }
        let w = hi - lo + 1;
        hi += w / 2 + 1;
        if one_sided(spec) {
            lo = 0;
        } else {
            lo -= w / 2 + 1;
        }
    }
}

/// Build a PMF table over an explicit window `[m_lo, m_hi]`.
pub fn pmf_table_windowed(
    spec: &ProcessSpec,
    t: f64,
    m_lo: i64,
    m_hi: i64,
    tol: f64,
) -> Result<PmfTable> {
    spec.validate()?;
    if m_hi < m_lo {
        return Err(Error::domain("pmf_table window is empty"));
    }
    let mut probs: Vec<f64> = Vec::with_capacity((m_hi - m_lo + 1) as usize);
    match spec {
        // one recursion pass instead of per-point evaluation
        ProcessSpec::Ppok { k, lambda } => {
            let upto = m_hi.max(0) as usize;
            let vec = ppok_pmf_vec(*k, *lambda, t, upto);
            for m in m_lo..=m_hi {
                probs.push(if m < 0 { 0.0 } else { vec[m as usize] });
            }
        }
        ProcessSpec::TimeChangedSpok { k, lambda1, lambda2, subordinator } => {
            probs = pmf::tcspok_probs_windowed(
                *k,
                *lambda1,
                *lambda2,
                subordinator,
                t,
                m_lo,
                m_hi,
                tol,
            )?;
        }
        // share the component vectors across the whole window
        ProcessSpec::Sfsp { alpha1, alpha2, lambda1, lambda2 } => {
            let (a1, a2, l1, l2) = (*alpha1, *alpha2, *lambda1, *lambda2);
            let up = move |n: i64| sfpp_pmf(a1, l1, t, n, tol);
            let down = move |n: i64| sfpp_pmf(a2, l2, t, n, tol);
            probs = pmf::component_difference_probs(&up, &down, m_lo, m_hi, tol)?;
        }
        ProcessSpec::Tsfsp { alpha1, mu1, alpha2, mu2, lambda1, lambda2 } => {
            let (a1, u1, a2, u2, l1, l2) = (*alpha1, *mu1, *alpha2, *mu2, *lambda1, *lambda2);
            let up = move |n: i64| tsfpp_pmf(a1, u1, l1, t, n, tol);
            let down = move |n: i64| tsfpp_pmf(a2, u2, l2, t, n, tol);
            probs = pmf::component_difference_probs(&up, &down, m_lo, m_hi, tol)?;
        }
        _ => {
            for m in m_lo..=m_hi {
                probs.push(pmf_point(spec, t, m, tol)?);
            }
        }
    }
    let clamped = clamp_probs(&mut probs)?;
    let total: f64 = probs.iter().sum();
    let table = PmfTable {
        spec: *spec,
        t,
        m_lo,
        m_hi,
        truncation_bound: (1.0 - total).max(0.0),
        probs,
        clamped,
    };
    table.validate()?;
    Ok(table)
}
