//! Gaussian kernels, seeded sampling and Gaussian mixture models.

mod mixture;
mod sampler;

pub use mixture::{interval_probability, Component, GaussianMixture};
pub use sampler::{mix64, stream_id, SeededSampler};

use crate::error::{Error, Result};

/// Centered isotropic Gaussian `N(0, sigma^2 I)` on `R^dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    dim: usize,
}

impl GaussianKernel {
    pub fn new(sigma: f64, dim: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("bandwidth {sigma} must be positive")));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("kernel dimension must be positive".into()));
        }
        Ok(Self { sigma, dim })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        mixture::log_gauss(x, &vec![0.0; x.len()], self.sigma).exp()
    }
}

/// `n` draws from `k`, returned row-major (`n * dim` values).
pub fn sample_gaussian(s: &mut SeededSampler, k: &GaussianKernel, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * k.dim];
    s.fill_normal(&mut out);
    for x in out.iter_mut() {
        *x *= k.sigma;
    }
    out
}
