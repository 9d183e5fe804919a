//! Computable envelope constants for the smoothed `TV1` rates.
//!
//! The mean constant is
//! `A_p * sqrt((C1 (2^p M_p + 1) + C2 2^p sigma^p) / (2 pi sigma)^{dT})` with
//! `C1 = int exp(-|u|^2) du`, `C2 = int |u|^p exp(-|u|^2) du` (Euclidean norm,
//! coming from the squared Gaussian density) and
//! `A_p^2 = int (|x| + 1/2)^2 / (1 + |x|^p) dx` in the sum-norm. `A_p` is
//! finite only for `p > dT + 2`. The deviation constant is
//! `(1 + 2 K) / (2 sigma) + 1` up to an unknown factor, set to one.

use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// `int_R exp(-x^2) dx` by the trapezoid rule, which converges geometrically
/// for this integrand.
pub fn gaussian_integral_1d() -> f64 {
    let (h, reach) = (1e-3, 10.0);
    let n = (2.0 * reach / h) as usize;
    (0..=n)
        .map(|i| {
            let x = -reach + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * (-x * x).exp()
        })
        .sum::<f64>()
        * h
}

/// `C1` in dimension `k`, by quadrature and Fubini.
pub fn c1_quadrature(k: usize) -> f64 {
    gaussian_integral_1d().powi(k as i32)
}

/// Surface area of the unit sphere in `R^k`.
pub fn sphere_area(k: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(k as f64 / 2.0) / gamma(k as f64 / 2.0)
}

/// `C2` in dimension `k` by radial quadrature.
pub fn c2_quadrature(k: usize, p: f64) -> f64 {
    let e = p + k as f64 - 1.0;
    let radial = log_substitution(|r| r.powf(e) * (-r * r).exp(), 1.0);
    sphere_area(k) * radial
}

/// `C2 = pi^{k/2} Gamma((k+p)/2) / Gamma(k/2)`.
pub fn c2_closed(k: usize, p: f64) -> f64 {
    let k = k as f64;
    std::f64::consts::PI.powf(k / 2.0) * (ln_gamma((k + p) / 2.0) - ln_gamma(k / 2.0)).exp()
}

/// `int_0^inf f(r) dr` through `r = e^y`, trapezoid in `y`. `decay` is the
/// exponential decay rate of `r f(r)` in `y` as `y -> inf`.
fn log_substitution(f: impl Fn(f64) -> f64, decay: f64) -> f64 {
    let h = 2e-3;
    let lo = -60.0;
    let hi = (45.0 / decay.max(1e-3)).min(2000.0);
    let n = ((hi - lo) / h) as usize;
    (0..=n)
        .map(|i| {
            let r = (lo + i as f64 * h).exp();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * r * f(r)
        })
        .sum::<f64>()
        * h
}

/// `int_{R^{dT}} (|x| + 1/2)^2 / (1 + |x|^p) dx` in the sum-norm, or `None`
/// when it diverges (`p <= dT + 2`).
pub fn weight_integral(d: usize, horizon: usize, p: f64) -> Option<f64> {
    let k = (d * horizon) as f64;
    if p <= k + 2.0 {
        return None;
    }
    // |{x : |x| <= r}| = (omega_d Gamma(d))^T r^{dT} / Gamma(dT + 1)
    let ln_shell = horizon as f64 * (sphere_area(d).ln() + ln_gamma(d as f64)) - ln_gamma(k);
    let shell = ln_shell.exp();
    let radial = log_substitution(|r| (r + 0.5).powi(2) / (1.0 + r.powf(p)) * r.powf(k - 1.0), p - k - 2.0);
    Some(shell * radial)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Envelope {
    pub sigma: f64,
    pub p: f64,
    pub moment: f64,
    pub dim: usize,
    pub c1: f64,
    pub c1_closed: f64,
    pub c2: f64,
    pub c2_closed: f64,
    /// `C1 (2^p M_p + 1) + C2 2^p sigma^p`.
    pub inner: f64,
    /// `sqrt(inner / (2 pi sigma)^{dT})`.
    pub root: f64,
    /// `A_p`, absent when the integral diverges.
    pub weight: Option<f64>,
    /// Mean-rate constant `A_p * root`.
    pub c_mean: Option<f64>,
    /// Deviation constant `(1 + 2 K) / (2 sigma) + 1`.
    pub c_deviation: f64,
}

/// Both envelope constants at bandwidth `sigma` for a law with `p`-th moment
/// `moment` supported in the ball of radius `k_bound`.
pub fn theoretical_envelope(sigma: f64, p: f64, moment: f64, k_bound: f64, d: usize, horizon: usize) -> Result<Envelope> {
    if !(sigma > 0.0) || !(p > 2.0) || !(moment >= 0.0) || !(k_bound >= 0.0) || d * horizon == 0 {
        return Err(Error::InvalidParameter(format!(
            "envelope needs sigma > 0, p > 2, M_p >= 0, K >= 0 (got {sigma}, {p}, {moment}, {k_bound})"
        )));
    }
    let k = d * horizon;
    let c1 = c1_quadrature(k);
    let c2 = c2_quadrature(k, p);
    let inner = c1 * (2f64.powf(p) * moment + 1.0) + c2 * 2f64.powf(p) * sigma.powf(p);
    let root = (inner / (2.0 * std::f64::consts::PI * sigma).powi(k as i32)).sqrt();
    let weight = weight_integral(d, horizon, p).map(f64::sqrt);
    Ok(Envelope {
        sigma,
        p,
        moment,
        dim: k,
        c1,
        c1_closed: std::f64::consts::PI.powf(k as f64 / 2.0),
        c2,
        c2_closed: c2_closed(k, p),
        inner,
        root,
        weight,
        c_mean: weight.map(|w| w * root),
        c_deviation: (1.0 + 2.0 * k_bound) / (2.0 * sigma) + 1.0,
    })
}
