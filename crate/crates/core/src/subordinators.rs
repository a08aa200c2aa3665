//! Lévy subordinators: Bernstein (Laplace) exponents, exact increment
//! samplers, and the Laplace-transform derivative functionals
//! `E[e^{-c D(t)} D(t)^n]` used by the time-changed PMF series.
//!
//! All four families have drift 0, so `E[e^{-s D(t)}] = e^{-t f(s)}` with
//! `f` one of
//!
//! ```text
//! gamma:            f(s) = p log(1 + s/α)
//! tempered stable:  f(s) = (s + μ)^α − μ^α
//! inverse Gaussian: f(s) = δ(√(2s + γ²) − γ)
//! stable:           f(s) = s^α
//! ```

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One of the four subordinator families, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SubordinatorSpec {
    Gamma { p: f64, alpha: f64 },
    TemperedStable { alpha: f64, mu: f64 },
    InverseGaussian { gamma: f64, delta: f64 },
    Stable { alpha: f64 },
}

impl SubordinatorSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            SubordinatorSpec::Gamma { .. } => "gamma",
            SubordinatorSpec::TemperedStable { .. } => "tempered_stable",
            SubordinatorSpec::InverseGaussian { .. } => "inverse_gaussian",
            SubordinatorSpec::Stable { .. } => "stable",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SubordinatorSpec::Gamma { p, alpha } => p > 0.0 && alpha > 0.0,
            SubordinatorSpec::TemperedStable { alpha, mu } => {
                alpha > 0.0 && alpha < 1.0 && mu > 0.0
            }
            SubordinatorSpec::InverseGaussian { gamma, delta } => gamma > 0.0 && delta > 0.0,
            SubordinatorSpec::Stable { alpha } => alpha > 0.0 && alpha < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid subordinator parameters: {self:?}")))
        }
    }

    /// Bernstein exponent `f(s)` for `s >= 0`; `f(0) = 0` for every family.
    pub fn laplace_exponent(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("laplace_exponent requires s >= 0, got {s}")));
        }
        Ok(match *self {
            SubordinatorSpec::Gamma { p, alpha } => p * (1.0 + s / alpha).ln(),
            SubordinatorSpec::TemperedStable { alpha, mu } => {
                (s + mu).powf(alpha) - mu.powf(alpha)
            }
            SubordinatorSpec::InverseGaussian { gamma, delta } => {
                delta * ((2.0 * s + gamma * gamma).sqrt() - gamma)
            }
            SubordinatorSpec::Stable { alpha } => s.powf(alpha),
        })
    }

    /// Analytic continuation of `f` to `Re z >= 0` (principal branches).
    pub fn laplace_exponent_complex(&self, z: Complex64) -> Complex64 {
        match *self {
            SubordinatorSpec::Gamma { p, alpha } => (Complex64::new(1.0, 0.0) + z / alpha).ln() * p,
            SubordinatorSpec::TemperedStable { alpha, mu } => {
                (z + mu).powf(alpha) - mu.powf(alpha)
            }
            SubordinatorSpec::InverseGaussian { gamma, delta } => {
                ((z * 2.0 + gamma * gamma).sqrt() - gamma) * delta
            }
            SubordinatorSpec::Stable { alpha } => {
                if z == Complex64::new(0.0, 0.0) {
                    Complex64::new(0.0, 0.0)
                } else {
                    z.powf(alpha)
                }
            }
        }
    }

    /// One increment of `D_f` over a window of length `dt`, strictly positive.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        self.sample_increment_counted(dt, rng).0
    }

    /// Increment plus the number of proposal draws it took (1 except for the
    /// tempered family, whose acceptance-rejection loop expects `e^{μ^α dt}`
    /// iterations).
    pub fn sample_increment_counted<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> (f64, u64) {
        assert!(dt > 0.0, "sample_increment requires dt > 0");
        match *self {
            SubordinatorSpec::Stable { alpha } => {
                (dt.powf(1.0 / alpha) * sample_stable_unit(alpha, rng), 1)
            }
            SubordinatorSpec::TemperedStable { alpha, mu } => {
                let scale = dt.powf(1.0 / alpha);
                let mut attempts = 0u64;
                loop {
                    attempts += 1;
                    let candidate = scale * sample_stable_unit(alpha, rng);
                    let w: f64 = rng.random();
                    if w <= (-mu * candidate).exp() {
                        return (candidate, attempts);
                    }
                }
            }
            SubordinatorSpec::Gamma { p, alpha } => {
                let dist = GammaDist::new(p * dt, 1.0 / alpha).expect("valid gamma parameters");
                loop {
                    let x = dist.sample(rng);
                    if x > 0.0 {
                        return (x, 1);
                    }
                }
            }
            SubordinatorSpec::InverseGaussian { gamma, delta } => {
                let mean = delta * dt / gamma;
                let shape = (delta * dt) * (delta * dt);
                loop {
                    let x = sample_inverse_gaussian(mean, shape, rng);
                    if x > 0.0 && x.is_finite() {
                        return (x, 1);
                    }
                }
            }
        }
    }

    /// `D_f(t)` in one shot. The tempered family is chunked so each
    /// acceptance-rejection window keeps `μ^α dt` below ~0.7; the others are
    /// a single exact draw.
    pub fn sample_total<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        match *self {
            SubordinatorSpec::TemperedStable { alpha, mu } => {
                let chunks = (mu.powf(alpha) * t / 0.7).ceil().max(1.0) as u64;
                let dt = t / chunks as f64;
                (0..chunks).map(|_| self.sample_increment(dt, rng)).sum()
            }
            _ => self.sample_increment(t, rng),
        }
    }

    /// Closed-form mean and variance of `D_f(t)`; the stable family has no
    /// finite integer moments.
    pub fn moments(&self, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("moments require t > 0, got {t}")));
        }
        match *self {
            SubordinatorSpec::Gamma { p, alpha } => Ok((p * t / alpha, p * t / (alpha * alpha))),
            SubordinatorSpec::TemperedStable { alpha, mu } => Ok((
                t * alpha * mu.powf(alpha - 1.0),
                t * alpha * (1.0 - alpha) * mu.powf(alpha - 2.0),
            )),
            SubordinatorSpec::InverseGaussian { gamma, delta } => {
                Ok((t * delta / gamma, t * delta / (gamma * gamma * gamma)))
            }
            SubordinatorSpec::Stable { .. } => Err(Error::UnsupportedFamily {
                family: self.family_name().into(),
                op: "moments",
            }),
        }
    }

    /// `E[e^{-c D_f(t)} D_f(t)^n] = (−1)^n dⁿ/dsⁿ e^{−t f(s)} |_{s=c}`.
    ///
    /// Central differences with two Richardson levels for `n <= 6`; Monte
    /// Carlo averaging over a fixed internal stream for larger `n`.
    pub fn lt_derivative_moment(&self, c: f64, n: u32, t: f64) -> Result<f64> {
        self.lt_derivative_moment_impl(c, n, t).map(|(v, _)| v)
    }

    /// Same as [`Self::lt_derivative_moment`], also returning the error
    /// estimate (Richardson defect or Monte Carlo standard error).
    pub fn lt_derivative_moment_with_err(&self, c: f64, n: u32, t: f64) -> Result<(f64, f64)> {
        self.lt_derivative_moment_impl(c, n, t)
    }

    fn lt_derivative_moment_impl(&self, c: f64, n: u32, t: f64) -> Result<(f64, f64)> {
        self.validate()?;
        if !(c > 0.0) {
            return Err(Error::domain(format!("lt_derivative_moment requires c > 0, got {c}")));
        }
        if !(t > 0.0) {
            return Err(Error::domain(format!("lt_derivative_moment requires t > 0, got {t}")));
        }
        if n > 40 {
            return Err(Error::domain(format!("lt_derivative_moment requires n <= 40, got {n}")));
        }
        if n >= 1 && matches!(self, SubordinatorSpec::Stable { .. }) {
            return Err(Error::UnsupportedFamily {
                family: self.family_name().into(),
                op: "lt_derivative_moment with n >= 1",
            });
        }
        if n == 0 {
            return Ok(((-t * self.laplace_exponent(c)?).exp(), 0.0));
        }
        if n <= 6 {
            let g = |s: f64| (-t * self.laplace_exponent(s).unwrap_or(f64::NAN)).exp();
            let (deriv, err) = central_derivative_richardson(&g, c, n)?;
            let value = if n % 2 == 0 { deriv } else { -deriv };
            let rel = err / value.abs().max(1e-300);
            if rel > 1e-6 && err > 1e-12 {
                return Err(Error::PrecisionLoss { estimate: value, error_estimate: err });
            }
            return Ok((value, err));
        }
        // Monte Carlo path over a fixed stream, so results are reproducible.
        let mut rng = ChaCha8Rng::seed_from_u64(0xD1FF_0001u64);
        let n_draws = 1_000_000usize;
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for _ in 0..n_draws {
            let y = self.sample_total(t, &mut rng);
            let v = (-c * y).exp() * y.powi(n as i32);
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n_draws as f64;
        let var = (sumsq / n_draws as f64 - mean * mean).max(0.0);
        Ok((mean, (var / n_draws as f64).sqrt()))
    }
}

use rand::SeedableRng;

/// Positive stable variate `D_α(1)` with `E[e^{-s D}] = e^{-s^α}`, from two
/// uniforms:
///
/// ```text
/// D = sin(απU) [sin((1−α)πU)]^{1/α−1} / ( [sin(πU)]^{1/α} |log V|^{1/α−1} )
/// ```
pub fn sample_stable_unit<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let u = clamp_open01(rng.random::<f64>()) * PI;
    let w = -clamp_open01(rng.random::<f64>()).ln();
    let s1 = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let s2 = (((1.0 - alpha) * u).sin() / w).powf(1.0 / alpha - 1.0);
    s1 * s2
}

/// Inverse Gaussian variate by the Michael–Schucany–Haas transform.
fn sample_inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> f64 {
    let nu: f64 = StandardNormal.sample(rng);
    let y = nu * nu;
    let x = mean + mean * mean * y / (2.0 * shape)
        - mean / (2.0 * shape) * (4.0 * mean * shape * y + mean * mean * y * y).sqrt();
    let u: f64 = rng.random();
    if u <= mean / (mean + x) {
        x
    } else {
        mean * mean / x
    }
}

#[inline]
fn clamp_open01(u: f64) -> f64 {
    u.clamp(1e-15, 1.0 - 1e-15)
}

/// n-th derivative by the (−1)^i C(n,i) g(s + (n/2 − i)h) central stencil,
/// two Richardson levels over the ladder h, h/2, h/4, with the base step
/// chosen adaptively.
///
/// High-order difference quotients divide by h^n, so tiny steps drown in
/// rounding error long before truncation error matters; the base step grows
/// with n and the candidate with the smallest internal defect wins.
fn central_derivative_richardson(g: &dyn Fn(f64) -> f64, c: f64, n: u32) -> Result<(f64, f64)> {
    const BASE_STEP: [f64; 7] = [0.0, 1e-3, 2e-3, 8e-3, 1.6e-2, 3.0e-2, 6.0e-2];
    let base = (BASE_STEP[n as usize] * (1.0 + 0.3 * c)).max(1e-4).max(1e-3 * c);
    // keep the widest stencil point strictly positive
    let max_h = 1.8 * c / n as f64;

    let binom: Vec<f64> = (0..=n).map(|i| crate::specfun::gen_binomial(n as f64, i)).collect();
    let stencil = |h: f64| -> f64 {
        let mut acc = 0.0;
        for (i, b) in binom.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * b * g(c + (n as f64 / 2.0 - i as f64) * h);
        }
        acc / h.powi(n as i32)
    };

    let mut best: Option<(f64, f64)> = None;
    for scale in [4.0, 2.0, 1.0, 0.5] {
        let h = (base * scale).min(max_h);
        let d0 = stencil(h);
        let d1 = stencil(h / 2.0);
        let d2 = stencil(h / 4.0);
        if !(d0.is_finite() && d1.is_finite() && d2.is_finite()) {
            continue;
        }
        let r1 = (4.0 * d1 - d0) / 3.0;
        let r1b = (4.0 * d2 - d1) / 3.0;
        let r2 = (16.0 * r1b - r1) / 15.0;
        let err = (r2 - r1b).abs();
        if best.map_or(true, |(_, e)| err < e) {
            best = Some((r2, err));
        }
    }
    best.ok_or_else(|| Error::Overflow("non-finite difference quotient".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    const FAMILIES: [SubordinatorSpec; 4] = [
        SubordinatorSpec::Gamma { p: 2.0, alpha: 3.0 },
        SubordinatorSpec::TemperedStable { alpha: 0.6, mu: 1.2 },
        SubordinatorSpec::InverseGaussian { gamma: 1.5, delta: 0.8 },
        SubordinatorSpec::Stable { alpha: 0.7 },
    ];

    #[test]
    fn laplace_exponent_values() {
        let stable = SubordinatorSpec::Stable { alpha: 0.5 };
        assert!((stable.laplace_exponent(4.0).unwrap() - 2.0).abs() < 1e-14);

        let ts = SubordinatorSpec::TemperedStable { alpha: 0.3, mu: 1.0 };
        assert_eq!(ts.laplace_exponent(0.0).unwrap(), 0.0);

        // p log(1 + s/α) with s/α = e − 1
        let g = SubordinatorSpec::Gamma { p: 2.0, alpha: 3.0 };
        let s = 3.0 * (std::f64::consts::E - 1.0);
        assert!((g.laplace_exponent(s).unwrap() - 2.0).abs() < 1e-13);

        assert!(g.laplace_exponent(-0.1).is_err());
        for f in FAMILIES {
            assert_eq!(f.laplace_exponent(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn laplace_exponent_concave_increasing() {
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        for f in FAMILIES {
            let vals: Vec<f64> = grid.iter().map(|&s| f.laplace_exponent(s).unwrap()).collect();
            for w in vals.windows(3) {
                assert!(w[1] >= w[0] - 1e-12, "{f:?} not increasing");
                assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-10, "{f:?} not concave");
            }
        }
    }

    #[test]
    fn increments_are_strictly_positive() {
        let mut r = rng(7);
        for f in FAMILIES {
            for &dt in &[0.01, 0.1, 1.0] {
                for _ in 0..2000 {
                    assert!(f.sample_increment(dt, &mut r) > 0.0, "{f:?} dt={dt}");
                }
            }
        }
    }

    #[test]
    fn empirical_laplace_transform_matches_exponent() {
        // E[e^{−s D(dt)}] = e^{−dt f(s)} within 4 standard errors
        let mut r = rng(42);
        let n = 200_000usize;
        for f in FAMILIES {
            for &dt in &[0.1, 1.0] {
                let draws: Vec<f64> = (0..n).map(|_| f.sample_increment(dt, &mut r)).collect();
                for &s in &[0.1, 0.5, 1.0, 2.0, 5.0] {
                    let vals: Vec<f64> = draws.iter().map(|&x| (-s * x).exp()).collect();
                    let mean: f64 = vals.iter().sum::<f64>() / n as f64;
                    let var: f64 =
                        vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
                    let se = (var / n as f64).sqrt();
                    let expect = (-dt * f.laplace_exponent(s).unwrap()).exp();
                    assert!(
                        (mean - expect).abs() <= 4.0 * se + 1e-12,
                        "{f:?} dt={dt} s={s}: {mean} vs {expect} (se {se})"
                    );
                }
            }
        }
    }

    #[test]
    fn tempered_acceptance_rate_matches_laplace_transform() {
        // the acceptance fraction of the rejection loop estimates
        // E[e^{−μ D_α(dt)}] = e^{−dt μ^α} under the stable proposal
        let (alpha, mu, dt) = (0.6f64, 1.2f64, 0.5f64);
        let f = SubordinatorSpec::TemperedStable { alpha, mu };
        let mut r = rng(11);
        let n = 100_000u64;
        let mut attempts = 0u64;
        for _ in 0..n {
            attempts += f.sample_increment_counted(dt, &mut r).1;
        }
        let acc_rate = n as f64 / attempts as f64;
        let expect = (-dt * mu.powf(alpha)).exp();
        let se = (expect * (1.0 - expect) / attempts as f64).sqrt();
        assert!((acc_rate - expect).abs() < 6.0 * se + 1e-3, "acceptance {acc_rate} vs {expect}");
    }

    #[test]
    fn stable_self_similarity_in_distribution() {
        // D_α(dt) =d= dt^{1/α} D_α(1); two-sample KS on rescaled draws
        let alpha = 0.5;
        let f = SubordinatorSpec::Stable { alpha };
        let mut r = rng(5);
        let dt = 0.1f64;
        let n = 10_000usize;
        let a: Vec<f64> = (0..n).map(|_| f.sample_increment(dt, &mut r)).collect();
        let b: Vec<f64> =
            (0..n).map(|_| dt.powf(1.0 / alpha) * f.sample_increment(1.0, &mut r)).collect();
        let (_, p) = crate::montecarlo::ks2_test(&a, &b);
        assert!(p > 0.01, "KS p-value {p}");
    }

    #[test]
    fn moments_closed_forms() {
        let ts = SubordinatorSpec::TemperedStable { alpha: 0.5, mu: 1.0 };
        let (m, _) = ts.moments(2.0).unwrap();
        assert!((m - 1.0).abs() < 1e-14);

        let g = SubordinatorSpec::Gamma { p: 1.0, alpha: 1.0 };
        let (m, v) = g.moments(1.0).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
        assert!((v - 1.0).abs() < 1e-14);

        assert!(matches!(
            SubordinatorSpec::Stable { alpha: 0.5 }.moments(1.0),
            Err(Error::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn moments_match_monte_carlo() {
        let mut r = rng(99);
        let n = 400_000usize;
        let t = 1.5f64;
        for f in &FAMILIES[..3] {
            let draws: Vec<f64> = (0..n).map(|_| f.sample_total(t, &mut r)).collect();
            let mean: f64 = draws.iter().sum::<f64>() / n as f64;
            let var: f64 =
                draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            let (em, ev) = f.moments(t).unwrap();
            let se_mean = (var / n as f64).sqrt();
            assert!((mean - em).abs() < 4.0 * se_mean, "{f:?} mean {mean} vs {em}");
            let m4: f64 = draws.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
            let se_var = ((m4 - var * var).max(0.0) / n as f64).sqrt();
            assert!((var - ev).abs() < 4.0 * se_var + 1e-9, "{f:?} var {var} vs {ev}");
        }
    }

    #[test]
    fn lt_derivative_zeroth_order() {
        for f in FAMILIES {
            let v = f.lt_derivative_moment(2.0, 0, 1.3).unwrap();
            let expect = (-1.3 * f.laplace_exponent(2.0).unwrap()).exp();
            assert!((v - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn lt_derivative_gamma_first_order_closed_form() {
        // symbolic oracle: −d/ds (1 + s/α)^{−pt} = (pt/(α+s))(1+s/α)^{−pt}
        let (p, alpha, t) = (2.0f64, 3.0f64, 1.5f64);
        let f = SubordinatorSpec::Gamma { p, alpha };
        for &c in &[0.5, 1.0, 4.0] {
            let oracle = (p * t / (alpha + c)) * (1.0 + c / alpha).powf(-p * t);
            let got = f.lt_derivative_moment(c, 1, t).unwrap();
            assert!((got - oracle).abs() < 1e-8 * oracle.abs(), "c={c}: {got} vs {oracle}");
        }
    }

    #[test]
    fn lt_derivative_matches_monte_carlo_up_to_n4() {
        let mut r = rng(2024);
        let n_draws = 200_000usize;
        let (c, t) = (1.0f64, 1.0f64);
        for f in &FAMILIES[..3] {
            let draws: Vec<f64> = (0..n_draws).map(|_| f.sample_total(t, &mut r)).collect();
            for n in 1..=4u32 {
                let vals: Vec<f64> =
                    draws.iter().map(|&y| (-c * y).exp() * y.powi(n as i32)).collect();
                let mean: f64 = vals.iter().sum::<f64>() / n_draws as f64;
                let var: f64 =
                    vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_draws as f64;
                let se = (var / n_draws as f64).sqrt();
                let got = f.lt_derivative_moment(c, n, t).unwrap();
                assert!(
                    (got - mean).abs() <= 4.0 * se + 1e-9,
                    "{f:?} n={n}: analytic {got} vs mc {mean} (se {se})"
                );
            }
        }
    }

    #[test]
    fn lt_derivative_rejects_stable_higher_orders() {
        let f = SubordinatorSpec::Stable { alpha: 0.5 };
        assert!(matches!(
            f.lt_derivative_moment(1.0, 1, 1.0),
            Err(Error::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn tempered_laplace_decays_in_c() {
        let f = SubordinatorSpec::TemperedStable { alpha: 0.4, mu: 0.8 };
        let mut prev = 1.0;
        for &c in &[0.5, 1.0, 2.0, 5.0, 20.0, 100.0] {
            let v = f.lt_derivative_moment(c, 0, 1.0).unwrap();
            assert!(v < prev && v > 0.0);
            prev = v;
        }
    }
}
