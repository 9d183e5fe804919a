//! Isotropic Gaussian mixtures on path space.
//!
//! Convolving component `k` with `N(0, sigma^2 I)` only inflates its scale to
//! `sqrt(s_k^2 + sigma^2)`, so smoothed mixtures stay mixtures and their
//! conditional laws are again mixtures with prefix-dependent weights.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::SeededSampler;
use crate::error::{Error, Result};
use crate::path_measure::{DiscretePathMeasure, GridSpec, PathSamples};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Cells farther than this many scales from a center are treated as empty.
const CELL_REACH: f64 = 9.0;

/// Prefix cells with less mass than this are dropped during quantization.
const MASS_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum CenterRepr {
    Flat(Vec<f64>),
    Stages(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ComponentRepr {
    w: f64,
    center: CenterRepr,
    scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct MixtureRepr {
    d: usize,
    #[serde(rename = "T")]
    horizon: usize,
    components: Vec<ComponentRepr>,
}

/// One component `w * N(center, scale^2 I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub w: f64,
    pub center: Vec<f64>,
    pub scale: f64,
}

/// Density `sum_k w_k phi_{s_k}(x - c_k)` on `R^{dT}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureRepr", into = "MixtureRepr")]
pub struct GaussianMixture {
    d: usize,
    horizon: usize,
    components: Vec<Component>,
}

impl TryFrom<MixtureRepr> for GaussianMixture {
    type Error = Error;

    fn try_from(r: MixtureRepr) -> Result<Self> {
        let components = r
            .components
            .into_iter()
            .map(|c| Component {
                w: c.w,
                center: match c.center {
                    CenterRepr::Flat(v) => v,
                    CenterRepr::Stages(v) => v.concat(),
                },
                scale: c.scale,
            })
            .collect();
        GaussianMixture::new(r.d, r.horizon, components)
    }
}

impl From<GaussianMixture> for MixtureRepr {
    fn from(g: GaussianMixture) -> Self {
        Self {
            d: g.d,
            horizon: g.horizon,
            components: g
                .components
                .into_iter()
                .map(|c| ComponentRepr {
                    w: c.w,
                    center: CenterRepr::Flat(c.center),
                    scale: c.scale,
                })
                .collect(),
        }
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `P(lo <= X < hi)` for `X ~ N(mean, scale^2)`, accurate in both tails.
pub fn interval_probability(lo: f64, hi: f64, mean: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        return if lo <= mean && mean < hi { 1.0 } else { 0.0 };
    }
    let a = (lo - mean) / scale;
    let b = (hi - mean) / scale;
    let p = if a >= 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else if b <= 0.0 {
        normal_cdf(b) - normal_cdf(a)
    } else {
        1.0 - normal_cdf(a) - normal_cdf(-b)
    };
    p.max(0.0)
}

impl GaussianMixture {
    pub fn new(d: usize, horizon: usize, components: Vec<Component>) -> Result<Self> {
        if d == 0 || horizon == 0 {
            return Err(Error::Shape(format!("d={d}, T={horizon} must be positive")));
        }
        if components.is_empty() {
            return Err(Error::Empty);
        }
        let mut sum = 0.0;
        for (idx, c) in components.iter().enumerate() {
            if c.center.len() != d * horizon {
                return Err(Error::DimensionMismatch {
                    expected: d * horizon,
                    got: c.center.len(),
                });
            }
            if let Some(pos) = c.center.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    idx: pos,
                    value: c.center[pos],
                });
            }
            if !(c.w > 0.0) || !c.w.is_finite() {
                return Err(Error::InvalidWeight { idx, value: c.w });
            }
            if !(c.scale >= 0.0) || !c.scale.is_finite() {
                return Err(Error::InvalidParameter(format!("component {idx} has scale {}", c.scale)));
            }
            sum += c.w;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { d, horizon, components })
    }

    /// Mixture of Gaussians of common scale `sigma` centered at the atoms of `m`.
    pub fn around_atoms(m: &DiscretePathMeasure, sigma: f64) -> Result<Self> {
        let components = m
            .atoms()
            .map(|(p, w)| Component {
                w,
                center: p.to_vec(),
                scale: sigma,
            })
            .collect();
        let mut g = Self {
            d: m.d(),
            horizon: m.horizon(),
            components,
        };
        // atom weights are normalized to rounding, not to 1e-12 of a fresh sum
        let total: f64 = g.components.iter().map(|c| c.w).sum();
        for c in g.components.iter_mut() {
            c.w /= total;
        }
        Ok(g)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.d * self.horizon
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mixture serializes")
    }

    /// Law of `X + sigma * eps` with `eps ~ N(0, I)`.
    pub fn smoothed(&self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("bandwidth {sigma} must be >= 0")));
        }
        let mut out = self.clone();
        for c in out.components.iter_mut() {
            c.scale = c.scale.hypot(sigma);
        }
        Ok(out)
    }

    /// Mean `sum_k w_k c_k`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for c in &self.components {
            for (o, x) in m.iter_mut().zip(&c.center) {
                *o += c.w * x;
            }
        }
        m
    }

    /// Joint density at a full path.
    pub fn density(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.w * log_gauss(x, &c.center, c.scale).exp())
            .sum()
    }

    /// Marginal density of the first `x.len()` coordinates.
    pub fn marginal_density(&self, x: &[f64]) -> f64 {
        let k = x.len();
        self.components
            .iter()
            .map(|c| c.w * log_gauss(x, &c.center[..k], c.scale).exp())
            .sum()
    }

    /// Component index, center and scale drawn per sample.
    pub fn sample(&self, s: &mut SeededSampler, n: usize) -> Result<PathSamples> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        let dim = self.dim();
        let cumulative: Vec<f64> = self
            .components
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.w;
                Some(*acc)
            })
            .collect();
        let mut data = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let u = s.uniform() * cumulative[cumulative.len() - 1];
            let k = cumulative.partition_point(|&c| c <= u).min(self.components.len() - 1);
            let c = &self.components[k];
            for &x in &c.center {
                data.push(x + c.scale * s.normal());
            }
        }
        PathSamples::new(self.d, self.horizon, data)
    }

    /// Posterior component weights `alpha_k` given a prefix, for the mixture
    /// smoothed by `sigma`.
    pub fn conditional_weights(&self, sigma: f64, prefix: &[f64]) -> Result<Vec<f64>> {
        self.check_prefix(prefix)?;
        let k = prefix.len();
        let logs: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.w.ln() + log_gauss(prefix, &c.center[..k], c.scale.hypot(sigma)))
            .collect();
        if logs.iter().any(|l| l.is_nan()) {
            return Err(Error::InvalidParameter("degenerate component with zero total scale".into()));
        }
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::InvalidParameter("prefix has zero density".into()));
        }
        let e: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = e.iter().sum();
        Ok(e.into_iter().map(|v| v / z).collect())
    }

    /// Density of the next stage given `prefix` under the mixture smoothed by `sigma`.
    pub fn smoothed_conditional_density(&self, sigma: f64, prefix: &[f64], point: &[f64]) -> Result<f64> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("bandwidth {sigma} must be positive")));
        }
        if point.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: point.len(),
            });
        }
        let alpha = self.conditional_weights(sigma, prefix)?;
        let k = prefix.len();
        Ok(self
            .components
            .iter()
            .zip(&alpha)
            .map(|(c, a)| a * log_gauss(point, &c.center[k..k + self.d], c.scale.hypot(sigma)).exp())
            .sum())
    }

    fn check_prefix(&self, prefix: &[f64]) -> Result<()> {
        let t = prefix.len() / self.d;
        if !prefix.len().is_multiple_of(self.d) || t == 0 || t >= self.horizon {
            return Err(Error::InvalidParameter(format!(
                "prefix of length {} is not 1..T-1 whole stages",
                prefix.len()
            )));
        }
        Ok(())
    }

    /// `W1` between the next-stage conditional laws at two prefixes, `d = 1`.
    pub fn conditional_w1(&self, sigma: f64, p: &[f64], q: &[f64]) -> Result<f64> {
        if self.d != 1 {
            return Err(Error::InvalidParameter("conditional W1 needs d = 1".into()));
        }
        let k = p.len();
        if q.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: q.len() });
        }
        let ap = self.conditional_weights(sigma, p)?;
        let aq = self.conditional_weights(sigma, q)?;
        let locs: Vec<(f64, f64)> = self
            .components
            .iter()
            .map(|c| (c.center[k], c.scale.hypot(sigma)))
            .collect();
        let cdf = |alpha: &[f64], x: f64| -> f64 {
            alpha
                .iter()
                .zip(&locs)
                .map(|(a, &(m, s))| a * if s > 0.0 { normal_cdf((x - m) / s) } else { f64::from(u8::from(x >= m)) })
                .sum()
        };
        let smax = locs.iter().map(|l| l.1).fold(0.0, f64::max).max(1e-3);
        let lo = locs.iter().map(|l| l.0).fold(f64::INFINITY, f64::min) - 10.0 * smax;
        let hi = locs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max) + 10.0 * smax;
        let steps = 20_000;
        let h = (hi - lo) / steps as f64;
        let f = |i: usize| {
            let x = lo + i as f64 * h;
            (cdf(&ap, x) - cdf(&aq, x)).abs()
        };
        let inner: f64 = (1..steps).map(f).sum();
        Ok(h * (inner + 0.5 * (f(0) + f(steps))))
    }

    /// Largest ratio `W1(cond(p), cond(q)) / |p - q|` over distinct probe pairs.
    /// A lower bound on the kernel Lipschitz constant, `d = 1` only.
    pub fn lipschitz_kernel_estimate(&self, sigma: f64, probes: &[Vec<f64>]) -> Result<f64> {
        let mut best: f64 = 0.0;
        for (i, p) in probes.iter().enumerate() {
            for q in &probes[i + 1..] {
                let dist = crate::path_measure::sum_distance(p, q, self.d);
                if dist == 0.0 {
                    continue;
                }
                best = best.max(self.conditional_w1(sigma, p, q)? / dist);
            }
        }
        Ok(best)
    }

    /// Exact cell probabilities of the mixture on `grid`, placed at cell midpoints.
    ///
    /// Cells are enumerated coordinate by coordinate, pruning prefixes whose
    /// mixture mass falls below a floor; the kept mass is renormalized.
    pub fn quantize(&self, grid: &GridSpec) -> Result<DiscretePathMeasure> {
        let dim = self.dim();
        if grid.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: grid.dim(),
            });
        }
        let g = grid.g() as f64;
        let kc = self.components.len();
        // per coordinate: candidate cells and per-component probabilities
        let mut tables: Vec<Vec<(f64, Vec<f64>)>> = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for comp in &self.components {
                lo = lo.min(grid.cell_index(comp.center[c] - CELL_REACH * comp.scale));
                hi = hi.max(grid.cell_index(comp.center[c] + CELL_REACH * comp.scale));
            }
            let mut cells = Vec::new();
            let mut z = lo;
            while z <= hi {
                let probs: Vec<f64> = self
                    .components
                    .iter()
                    .map(|comp| interval_probability(z / g, (z + 1.0) / g, comp.center[c], comp.scale))
                    .collect();
                if probs.iter().any(|&p| p > 0.0) {
                    cells.push(((z + 0.5) / g, probs));
                }
                z += 1.0;
            }
            tables.push(cells);
        }
        let weights: Vec<f64> = self.components.iter().map(|c| c.w).collect();
        let mut coords = Vec::new();
        let mut masses = Vec::new();
        let mut path = Vec::with_capacity(dim);
        let mut partial = vec![1.0; kc];
        quantize_dfs(&tables, &weights, 0, &mut partial, &mut path, &mut coords, &mut masses);
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Empty);
        }
        let masses = masses.into_iter().map(|m| m / total).collect();
        DiscretePathMeasure::from_flat(self.d, self.horizon, coords, masses)
    }
}

fn quantize_dfs(
    tables: &[Vec<(f64, Vec<f64>)>],
    weights: &[f64],
    c: usize,
    partial: &mut Vec<f64>,
    path: &mut Vec<f64>,
    coords: &mut Vec<f64>,
    masses: &mut Vec<f64>,
) {
    if c == tables.len() {
        coords.extend_from_slice(path);
        masses.push(weights.iter().zip(partial.iter()).map(|(w, p)| w * p).sum());
        return;
    }
    let saved = partial.clone();
    for (mid, probs) in &tables[c] {
        for k in 0..partial.len() {
            partial[k] = saved[k] * probs[k];
        }
        let mass: f64 = weights.iter().zip(partial.iter()).map(|(w, p)| w * p).sum();
        if mass < MASS_FLOOR {
            continue;
        }
        path.push(*mid);
        quantize_dfs(tables, weights, c + 1, partial, path, coords, masses);
        path.pop();
    }
    partial.copy_from_slice(&saved);
}

/// Log density of `N(center, scale^2 I)` at `x`.
pub(crate) fn log_gauss(x: &[f64], center: &[f64], scale: f64) -> f64 {
    let k = x.len() as f64;
    let sq: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    if scale == 0.0 {
        return if sq == 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    -0.5 * sq / (scale * scale) - k * scale.ln() - 0.5 * k * LN_2PI
}
