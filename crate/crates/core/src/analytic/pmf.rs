//! Probability mass functions for every integer-valued family.
//!
//! The order-k recursion is the compound-Poisson form of the sum over
//! `Ω(k,n) = {x : x_1 + 2x_2 + … + k x_k = n}`; the brute-force enumeration
//! over `Ω(k,n)` stays available as an oracle. The two Skellam-of-order-k
//! PMFs are deliberately both exposed: `spok_pmf_conv` follows the
//! definition (difference of two order-k paths) and `spok_pmf_closedform`
//! evaluates the Bessel closed form, which coincides with an
//! ordinary Skellam at rates `k λ1, k λ2`. They disagree for k >= 2; the
//! Monte Carlo harness sides with the convolution.

use crate::error::{Error, Result};
use crate::specfun::{bessel_i, fox_wright_scaled, log_gamma};
use crate::subordinators::SubordinatorSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draw count for the subordinator mixture behind the time-changed PMF.
const TCSPOK_DRAWS: usize = 200_000;
/// Fixed stream for that mixture, so repeated evaluations agree bit-exactly.
const TCSPOK_SEED: u64 = 0x7C50_ACE5;

/// Poisson pmf `e^{−μ} μ^n / n!`, zero for negative `n`.
pub fn poisson_pmf(mean: f64, n: i64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    (nf * mean.ln() - mean - log_gamma(nf + 1.0).expect("n + 1 > 0")).exp()
}

/// Skellam pmf `e^{−t(λ1+λ2)} (λ1/λ2)^{m/2} I_{|m|}(2t√(λ1 λ2))`.
///
/// `λ2 = 0` returns the Poisson(λ1 t) limit.
pub fn skellam_pmf(lambda1: f64, lambda2: f64, t: f64, m: i64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("skellam_pmf requires t > 0, got {t}")));
    }
    if !(lambda1 > 0.0 && lambda2 >= 0.0) {
        return Err(Error::domain(format!(
            "skellam_pmf requires lambda1 > 0, lambda2 >= 0, got {lambda1}, {lambda2}"
        )));
    }
    if lambda2 == 0.0 {
        return Ok(poisson_pmf(lambda1 * t, m));
    }
    let z = 2.0 * t * (lambda1 * lambda2).sqrt();
    let bess = bessel_i(m.unsigned_abs() as u32, z, 1e-14)?;
    if bess.value == 0.0 {
        return Ok(0.0);
    }
    // assembled in log space: the prefactor alone can overflow at large |m|
    // while the Bessel factor underflows
    let ln_front = -t * (lambda1 + lambda2) + 0.5 * m as f64 * (lambda1 / lambda2).ln();
    Ok((ln_front + bess.value.ln()).exp())
}

/// PMF vector `p_0..p_{n_max}` of the Poisson process of order k by the
/// recursion `p_0 = e^{−kλt}`, `p_n = (λt/n) Σ_{j=1}^{min(k,n)} j p_{n−j}`.
pub fn ppok_pmf_vec(k: u32, lambda: f64, t: f64, n_max: usize) -> Vec<f64> {
    assert!(k >= 1 && lambda > 0.0 && t > 0.0);
    let lt = lambda * t;
    let mut p = Vec::with_capacity(n_max + 1);
    p.push((-(k as f64) * lt).exp());
    for n in 1..=n_max {
        let mut s = 0.0;
        for j in 1..=(k as usize).min(n) {
            s += j as f64 * p[n - j];
        }
        p.push(lt / n as f64 * s);
    }
    p
}

/// Single pmf value of the Poisson process of order k (zero below 0).
pub fn ppok_pmf(k: u32, lambda: f64, t: f64, n: i64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    *ppok_pmf_vec(k, lambda, t, n as usize).last().unwrap()
}

/// Brute-force oracle: direct sum of `e^{−kλt} (λt)^{ζ} / Π x_i!` over all
/// solutions of `x_1 + 2x_2 + … + k x_k = n`. Limited to `n <= 30`,
/// `k <= 6`.
pub fn ppok_pmf_enumerate(k: u32, lambda: f64, t: f64, n: i64) -> Result<f64> {
    if n < 0 {
        return Ok(0.0);
    }
    if n > 30 || k > 6 {
        return Err(Error::Size(format!(
            "ppok_pmf_enumerate supports n <= 30 and k <= 6, got n = {n}, k = {k}"
        )));
    }
    let ln_lt = (lambda * t).ln();
    fn walk(size: i64, remaining: i64, zeta: f64, ln_fact: f64, ln_lt: f64, acc: &mut f64) {
        if size == 0 {
            if remaining == 0 {
                *acc += (zeta * ln_lt - ln_fact).exp();
            }
            return;
        }
        let mut x = 0i64;
        while x * size <= remaining {
            walk(
                size - 1,
                remaining - x * size,
                zeta + x as f64,
                ln_fact + log_gamma(x as f64 + 1.0).unwrap(),
                ln_lt,
                acc,
            );
            x += 1;
        }
    }
    let mut acc = 0.0;
    walk(k as i64, n, 0.0, 0.0, ln_lt, &mut acc);
    Ok((-(k as f64) * lambda * t).exp() * acc)
}

/// Definition-faithful Skellam-of-order-k pmf: the convolution
/// `Σ_n p^{(1)}_{n+m} p^{(2)}_n` of two order-k PMFs, truncated once the
/// second factor's remaining mass drops below `tol`.
pub fn spok_pmf_conv(k: u32, lambda1: f64, lambda2: f64, t: f64, m: i64, tol: f64) -> f64 {
    assert!(k >= 1 && lambda1 > 0.0 && lambda2 >= 0.0 && t > 0.0 && tol > 0.0);
    if lambda2 == 0.0 {
        return ppok_pmf(k, lambda1, t, m);
    }
    let (shift1, shift2) = if m >= 0 { (m as usize, 0usize) } else { (0usize, (-m) as usize) };
    let mut block = 64usize;
    loop {
        let p1 = ppok_pmf_vec(k, lambda1, t, block + shift1);
        let p2 = ppok_pmf_vec(k, lambda2, t, block + shift2);
        let mut sum = 0.0f64;
        for n in 0..=block {
            sum += p1[n + shift1] * p2[n + shift2];
        }
        // remaining mass of the second path bounds the tail of the sum
        let cum2: f64 = p2.iter().sum();
        let tail = (1.0 - cum2).max(0.0);
        if tail < tol || block > 1 << 22 {
            return sum;
        }
        block *= 2;
    }
}

/// Closed-form marginal of the Skellam process of order k:
/// `e^{−kt(λ1+λ2)} (λ1/λ2)^{m/2} I_{|m|}(2tk√(λ1 λ2))`, i.e. an ordinary
/// Skellam with rates `k λ1, k λ2`. Requires `λ2 > 0`.
pub fn spok_pmf_closedform(k: u32, lambda1: f64, lambda2: f64, t: f64, m: i64) -> Result<f64> {
    if lambda2 == 0.0 {
        return Err(Error::domain(
            "spok_pmf_closedform degenerates at lambda2 = 0; use spok_pmf_conv",
        ));
    }
    if !(k >= 1 && lambda1 > 0.0 && lambda2 > 0.0 && t > 0.0) {
        return Err(Error::domain("spok_pmf_closedform: invalid parameters"));
    }
    skellam_pmf(k as f64 * lambda1, k as f64 * lambda2, t, m)
}

/// Probability generating function of the Skellam process of order k:
/// `exp(−t(k(λ1+λ2) − λ1 Σ s^j − λ2 Σ s^{−j}))`.
pub fn spok_pgf(k: u32, lambda1: f64, lambda2: f64, t: f64, s: f64) -> f64 {
    assert!(s > 0.0);
    let mut up = 0.0;
    let mut down = 0.0;
    for j in 1..=k as i32 {
        up += s.powi(j);
        down += s.powi(-j);
    }
    (-t * (k as f64 * (lambda1 + lambda2) - lambda1 * up - lambda2 * down)).exp()
}

/// Space-fractional Poisson pmf
/// `P^α(n,t) = ((−1)^n / n!) · 1ψ1[(1,α);(1−n,α)](−λ^α t)`,
/// exactly Poisson at `α = 1`.
pub fn sfpp_pmf(alpha: f64, lambda: f64, t: f64, n: i64, tol: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("sfpp_pmf requires alpha in (0,1], got {alpha}")));
    }
    if !(lambda > 0.0 && t > 0.0 && tol > 0.0) {
        return Err(Error::domain("sfpp_pmf: invalid parameters"));
    }
    if n < 0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(poisson_pmf(lambda * t, n));
    }
    let z = -lambda.powf(alpha) * t;
    let ln_scale = -log_gamma(n as f64 + 1.0)?;
    let fw = fox_wright_scaled(1.0, alpha, 1.0 - n as f64, alpha, z, tol, ln_scale)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * fw.value)
}

/// Independent route to the space-fractional pmf vector: the process is
/// compound Poisson with arrival rate `λ^α` and jump law
/// `q_j = (−1)^{j+1} (α choose j)` (the atom weights of its Lévy measure,
/// which total `λ^α`), so the order-free recursion
/// `p_n = (Λ/n) Σ_j j q_j p_{n−j}` with `Λ = λ^α t` reproduces the
/// Fox-Wright values. Used as a cross-check oracle.
pub fn sfpp_pmf_recursion(alpha: f64, lambda: f64, t: f64, n_max: usize) -> Vec<f64> {
    assert!(alpha > 0.0 && alpha <= 1.0 && lambda > 0.0 && t > 0.0);
    let big_lambda = lambda.powf(alpha) * t;
    let q: Vec<f64> = (0..=n_max)
        .map(|j| {
            if j == 0 {
                0.0
            } else {
                crate::specfun::gen_binomial(alpha, j as u32)
                    * if j % 2 == 1 { 1.0 } else { -1.0 }
            }
        })
        .collect();
    let mut p = Vec::with_capacity(n_max + 1);
    p.push((-big_lambda).exp());
    for n in 1..=n_max {
        let mut acc = 0.0;
        for j in 1..=n {
            acc += j as f64 * q[j] * p[n - j];
        }
        p.push(big_lambda / n as f64 * acc);
    }
    p
}

/// Tempered space-fractional Poisson pmf: the tempering series
/// `e^{tμ^α} ((−1)^n/n!) Σ_m (μ^m λ^{−m}/m!) 1ψ1[(1,α);(1−n−m,α)](−λ^α t)`.
///
/// The tempering sum collapses in closed form: with `q = 1 + αr − n`,
/// `Σ_m (μ/λ)^m / (m! Γ(q − m)) = ((λ+μ)/λ)^{q−1} / Γ(q)`, which folds the
/// whole double series into
/// `e^{tμ^α} (λ/(λ+μ))^n · P^α_{λ+μ}(n, t)`. The literal double sum (which
/// converges term-by-term for μ < λ) is kept as a test oracle.
pub fn tsfpp_pmf(alpha: f64, mu: f64, lambda: f64, t: f64, n: i64, tol: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("tsfpp_pmf requires alpha in (0,1], got {alpha}")));
    }
    if !(mu > 0.0 && lambda > 0.0 && t > 0.0 && tol > 0.0) {
        return Err(Error::domain("tsfpp_pmf: invalid parameters"));
    }
    if n < 0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        // (s + μ) − μ = s: the tempered exponent is linear, plain Poisson
        return Ok(poisson_pmf(lambda * t, n));
    }
    let base = sfpp_pmf(alpha, lambda + mu, t, n, tol)?;
    let ln_weight = t * mu.powf(alpha) + n as f64 * (lambda.ln() - (lambda + mu).ln());
    Ok(ln_weight.exp() * base)
}

/// Literal double-series evaluation of the tempered pmf, tempering sum
/// expanded term by term. Geometric outer decay needs `μ < λ`.
#[cfg(test)]
fn tsfpp_pmf_double_series(
    alpha: f64,
    mu: f64,
    lambda: f64,
    t: f64,
    n: i64,
    outer_terms: usize,
) -> Result<f64> {
    use crate::specfun::KahanSum;
    let z = -lambda.powf(alpha) * t;
    let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
    let ln_front = t * mu.powf(alpha) - log_gamma(n as f64 + 1.0)?;
    let ln_ratio = mu.ln() - lambda.ln();
    let mut sum = KahanSum::default();
    let mut ln_mfact = 0.0f64;
    for m_idx in 0..outer_terms {
        if m_idx > 0 {
            ln_mfact += (m_idx as f64).ln();
        }
        let ln_scale = ln_front + m_idx as f64 * ln_ratio - ln_mfact;
        let fw = fox_wright_scaled(
            1.0,
            alpha,
            1.0 - n as f64 - m_idx as f64,
            alpha,
            z,
            1e-14,
            ln_scale,
        )?;
        sum.add(sign_n * fw.value);
    }
    Ok(sum.value())
}

/// Convolution of two one-sided component pmfs into the signed difference
/// pmf at `m`: `Σ_n pmf_up(n + max(m,0)) pmf_down(n + max(−m,0))`.
fn convolve_difference(
    pmf_up: &dyn Fn(i64) -> Result<f64>,
    pmf_down: &dyn Fn(i64) -> Result<f64>,
    m: i64,
    tol: f64,
) -> Result<f64> {
    let (shift_up, shift_down) = if m >= 0 { (m, 0) } else { (0, -m) };
    let mut sum = 0.0f64;
    let mut streak = 0usize;
    for n in 0..500_000i64 {
        let a = pmf_up(n + shift_up)?;
        let b = pmf_down(n + shift_down)?;
        let term = a * b;
        sum += term;
        if n >= 10 && term <= tol * 1e-2 * sum.max(1e-300) {
            streak += 1;
            if streak >= 8 {
                return Ok(sum);
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::NonConvergence { terms: 500_000, last_term: sum })
}

/// Space-fractional Skellam pmf: cross-convolution of two SFPP marginals
/// with separate stability indices.
pub fn sfsp_pmf(
    alpha1: f64,
    alpha2: f64,
    lambda1: f64,
    lambda2: f64,
    t: f64,
    m: i64,
    tol: f64,
) -> Result<f64> {
    let up = move |n: i64| sfpp_pmf(alpha1, lambda1, t, n, tol);
    let down = move |n: i64| sfpp_pmf(alpha2, lambda2, t, n, tol);
    convolve_difference(&up, &down, m, tol)
}

/// Tempered space-fractional Skellam pmf: cross-convolution of two TSFPP
/// marginals.
#[allow(clippy::too_many_arguments)]
pub fn tsfsp_pmf(
    alpha1: f64,
    mu1: f64,
    alpha2: f64,
    mu2: f64,
    lambda1: f64,
    lambda2: f64,
    t: f64,
    m: i64,
    tol: f64,
) -> Result<f64> {
    let up = move |n: i64| tsfpp_pmf(alpha1, mu1, lambda1, t, n, tol);
    let down = move |n: i64| tsfpp_pmf(alpha2, mu2, lambda2, t, n, tol);
    convolve_difference(&up, &down, m, tol)
}

/// Windowed difference-convolution over two one-sided component PMFs,
/// sharing one pair of component vectors across the whole window.
pub(crate) fn component_difference_probs(
    pmf_up: &dyn Fn(i64) -> Result<f64>,
    pmf_down: &dyn Fn(i64) -> Result<f64>,
    m_lo: i64,
    m_hi: i64,
    tol: f64,
) -> Result<Vec<f64>> {
    let shift_up = m_hi.max(0) as usize;
    let shift_down = (-m_lo).max(0) as usize;
    let mut up: Vec<f64> = Vec::new();
    let mut down: Vec<f64> = Vec::new();
    let mut depth = 64usize;
    loop {
        while up.len() <= depth + shift_up {
            up.push(pmf_up(up.len() as i64)?);
        }
        while down.len() <= depth + shift_down {
            down.push(pmf_down(down.len() as i64)?);
        }
        let tail_up = (1.0 - up.iter().sum::<f64>()).max(0.0);
        let tail_down = (1.0 - down.iter().sum::<f64>()).max(0.0);
        // light tails empty out; heavy tails stop once the pointwise
        // convolution error estimate falls away
        let point_err = up[depth] * tail_down + down[depth] * tail_up;
        if tail_up.min(tail_down) < tol || point_err < tol * 1e-3 || depth >= 100_000 {
            break;
        }
        depth *= 2;
    }
    let mut probs = Vec::with_capacity((m_hi - m_lo + 1) as usize);
    for m in m_lo..=m_hi {
        let (su, sd) = if m >= 0 { (m as usize, 0usize) } else { (0usize, (-m) as usize) };
        let mut acc = 0.0f64;
        for n in 0..=depth {
            acc += up[n + su] * down[n + sd];
        }
        probs.push(acc);
    }
    Ok(probs)
}

fn tcspok_validate(k: u32, lambda1: f64, lambda2: f64, sub: &SubordinatorSpec) -> Result<()> {
    sub.validate()?;
    if matches!(sub, SubordinatorSpec::Stable { .. }) {
        return Err(Error::UnsupportedFamily { family: "stable".into(), op: "tcspok_pmf" });
    }
    if !(k >= 1 && lambda1 > 0.0 && lambda2 >= 0.0) {
        return Err(Error::domain("tcspok: invalid parameters"));
    }
    Ok(())
}

/// Time-changed Skellam-of-order-k pmf: the mixture
/// `E[R_m(D_f(t))]` over the subordinator's law, evaluated as a fixed-seed
/// Monte Carlo average of the closed-form marginal. Summing the marginal's
/// Bessel series under the expectation recovers, term by term, the series
/// `Σ_x (kλ1)^{m+x}(kλ2)^x / ((m+x)! x!) · E[e^{−k(λ1+λ2)D} D^{m+2x}]`,
/// which `tcspok_pmf_series` evaluates directly through the derivative
/// functionals as a cross-check.
pub fn tcspok_pmf(
    k: u32,
    lambda1: f64,
    lambda2: f64,
    sub: &SubordinatorSpec,
    t: f64,
    m: i64,
    tol: f64,
) -> Result<f64> {
    let probs = tcspok_probs_windowed(k, lambda1, lambda2, sub, t, m, m, tol)?;
    Ok(probs[0])
}

/// Shared-draw evaluation of the time-changed pmf over a whole window.
#[allow(clippy::too_many_arguments)]
pub(crate) fn tcspok_probs_windowed(
    k: u32,
    lambda1: f64,
    lambda2: f64,
    sub: &SubordinatorSpec,
    t: f64,
    m_lo: i64,
    m_hi: i64,
    _tol: f64,
) -> Result<Vec<f64>> {
    tcspok_validate(k, lambda1, lambda2, sub)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("tcspok_pmf requires t > 0, got {t}")));
    }
    let kl1 = k as f64 * lambda1;
    let kl2 = k as f64 * lambda2;
    let mut rng = ChaCha8Rng::seed_from_u64(TCSPOK_SEED);
    let width = (m_hi - m_lo + 1) as usize;
    let mut acc = vec![0.0f64; width];
    for _ in 0..TCSPOK_DRAWS {
        let y = sub.sample_total(t, &mut rng);
        for (i, m) in (m_lo..=m_hi).enumerate() {
            acc[i] += skellam_pmf(kl1, kl2, y, m)?;
        }
    }
    for a in acc.iter_mut() {
        *a /= TCSPOK_DRAWS as f64;
    }
    Ok(acc)
}

/// The term-by-term series form of the time-changed pmf, truncated at `x_max`,
/// with every `E[e^{−cD} D^n]` delegated to the subordinator's derivative
/// functional. Usable while `m + 2 x_max` stays within that functional's
/// supported orders.
pub fn tcspok_pmf_series(
    k: u32,
    lambda1: f64,
    lambda2: f64,
    sub: &SubordinatorSpec,
    t: f64,
    m: i64,
    x_max: u32,
) -> Result<f64> {
    tcspok_validate(k, lambda1, lambda2, sub)?;
    let kl1 = k as f64 * lambda1;
    let kl2 = k as f64 * lambda2;
    let c = k as f64 * (lambda1 + lambda2);
    let mut sum = 0.0f64;
    let x_start = 0.max(-m);
    for x in x_start..=x_max as i64 {
        let coef = if kl2 == 0.0 && x > 0 {
            0.0
        } else {
            let ln = (m + x) as f64 * kl1.ln()
                + if x == 0 { 0.0 } else { x as f64 * kl2.ln() }
                - log_gamma((m + x) as f64 + 1.0)?
                - log_gamma(x as f64 + 1.0)?;
            ln.exp()
        };
        if coef == 0.0 {
            continue;
        }
        let order = (m + 2 * x) as u32;
        sum += coef * sub.lt_derivative_moment(c, order, t)?;
    }
    Ok(sum)
}
