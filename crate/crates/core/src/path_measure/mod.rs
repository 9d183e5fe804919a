//! Finitely supported laws of `T`-stage paths in `R^d`.
//!
//! A path `x = (x_1, ..., x_T)` is stored as a flat row of `d * T` coordinates,
//! stage-major. The norm used throughout the crate is the sum-norm
//! `||x|| = sum_t |x_t|_2`, i.e. Euclidean within a stage and additive across
//! stages.
//!
//! [`DiscretePathMeasure`] values are always canonical: coordinates finite,
//! `-0.0` folded into `0.0`, atoms sorted lexicographically, duplicate paths
//! merged and zero-weight atoms dropped. Canonical form makes two measures
//! equal exactly when their atom lists are equal, and it makes every prefix
//! class a contiguous block of atoms, which [`PrefixTree`] relies on.

mod grid;
mod io;
mod tree;

pub use grid::{adapted_project, GridSpec};
pub use io::{AtomRecord, MeasureFile, SamplesFile};
pub use tree::{disintegrate, linear_moment_coefficient, PrefixTree, TreeLevel};

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerance accepted on the total mass of user-supplied weights.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Euclidean norm of one stage.
#[inline]
pub fn stage_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Euclidean distance between two stages.
#[inline]
pub fn stage_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Sum-norm of a flat path with stage dimension `d`.
pub fn sum_norm(coords: &[f64], d: usize) -> f64 {
    coords.chunks_exact(d).map(stage_norm).sum()
}

/// Sum-norm distance between two flat paths with stage dimension `d`.
pub fn sum_distance(x: &[f64], y: &[f64], d: usize) -> f64 {
    x.chunks_exact(d)
        .zip(y.chunks_exact(d))
        .map(|(a, b)| stage_distance(a, b))
        .sum()
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

fn check_finite(coords: &[f64]) -> Result<()> {
    match coords.iter().position(|v| !v.is_finite()) {
        Some(idx) => Err(Error::NonFinite {
            idx,
            value: coords[idx],
        }),
        None => Ok(()),
    }
}

/// A single path `x_{1:T}` in `R^{dT}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    d: usize,
    horizon: usize,
    coords: Vec<f64>,
}

impl Path {
    pub fn new(d: usize, horizon: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 || horizon == 0 {
            return Err(Error::Shape(format!("d={d}, T={horizon} must be positive")));
        }
        if coords.len() != d * horizon {
            return Err(Error::DimensionMismatch {
                expected: d * horizon,
                got: coords.len(),
            });
        }
        check_finite(&coords)?;
        Ok(Self { d, horizon, coords })
    }

    /// Builds a path from its stages.
    pub fn from_stages(stages: &[Vec<f64>]) -> Result<Self> {
        let d = stages.first().map(Vec::len).ok_or(Error::Empty)?;
        if stages.iter().any(|s| s.len() != d) {
            return Err(Error::Shape("stages have different dimensions".into()));
        }
        Self::new(d, stages.len(), stages.concat())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn stage(&self, t: usize) -> &[f64] {
        &self.coords[t * self.d..(t + 1) * self.d]
    }

    pub fn sum_norm(&self) -> f64 {
        sum_norm(&self.coords, self.d)
    }
}

/// A probability measure with finitely many atoms on `R^{dT}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePathMeasure {
    d: usize,
    horizon: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscretePathMeasure {
    /// Builds a canonical measure from `(path, weight)` pairs.
    ///
    /// Weights must be non-negative and sum to one within [`MASS_TOLERANCE`];
    /// they are renormalized exactly afterwards.
    pub fn new(d: usize, horizon: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let dim = d * horizon;
        let mut coords = Vec::with_capacity(atoms.len() * dim);
        let mut weights = Vec::with_capacity(atoms.len());
        for (path, w) in atoms {
            if path.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: path.len(),
                });
            }
            coords.extend_from_slice(&path);
            weights.push(w);
        }
        Self::from_flat(d, horizon, coords, weights)
    }

    /// Builds a canonical measure from row-major coordinates and weights.
    pub fn from_flat(d: usize, horizon: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if d == 0 || horizon == 0 {
            return Err(Error::Shape(format!("d={d}, T={horizon} must be positive")));
        }
        let dim = d * horizon;
        if coords.len() != weights.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * dim,
                got: coords.len(),
            });
        }
        check_finite(&coords)?;
        for (idx, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight { idx, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Self::canonical(d, horizon, coords, weights)
    }

    /// Uniform measure over the rows of `samples`, duplicates merged.
    pub fn empirical(samples: &PathSamples) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let w = 1.0 / n as f64;
        Self::canonical(
            samples.d(),
            samples.horizon(),
            samples.data().to_vec(),
            vec![w; n],
        )
    }

    pub fn dirac(path: &Path) -> Self {
        Self {
            d: path.d,
            horizon: path.horizon,
            coords: path.coords.iter().map(|&v| v + 0.0).collect(),
            weights: vec![1.0],
        }
    }

    /// Sorts, merges duplicates, drops empty atoms and renormalizes.
    /// Callers guarantee finiteness and non-negative weights.
    fn canonical(d: usize, horizon: usize, mut coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let dim = d * horizon;
        for v in coords.iter_mut() {
            // folds -0.0 into 0.0 so that equality is bitwise
            *v += 0.0;
        }
        let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        if order.is_empty() {
            return Err(Error::Empty);
        }
        order.sort_by(|&a, &b| lex_cmp(&coords[a * dim..(a + 1) * dim], &coords[b * dim..(b + 1) * dim]));

        let mut out_coords: Vec<f64> = Vec::with_capacity(order.len() * dim);
        let mut out_weights: Vec<f64> = Vec::with_capacity(order.len());
        for &i in &order {
            let row = &coords[i * dim..(i + 1) * dim];
            let same = out_weights
                .len()
                .checked_sub(1)
                .map(|last| &out_coords[last * dim..] == row)
                .unwrap_or(false);
            if same {
                *out_weights.last_mut().expect("non-empty") += weights[i];
            } else {
                out_coords.extend_from_slice(row);
                out_weights.push(weights[i]);
            }
        }
        let total = pairwise_sum(&out_weights);
        for w in out_weights.iter_mut() {
            *w /= total;
        }
        Ok(Self {
            d,
            horizon,
            coords: out_coords,
            weights: out_weights,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Path dimension `d * T`.
    pub fn dim(&self) -> usize {
        self.d * self.horizon
    }

    /// Number of distinct atoms.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let dim = self.dim();
        &self.coords[i * dim..(i + 1) * dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords
            .chunks_exact(self.dim())
            .zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.horizon != other.horizon {
            return Err(Error::ShapeMismatch {
                d_a: self.d,
                t_a: self.horizon,
                d_b: other.d,
                t_b: other.horizon,
            });
        }
        Ok(())
    }

    /// Weight of the atom at `path`, zero when absent.
    pub fn mass_at(&self, path: &[f64]) -> f64 {
        let dim = self.dim();
        self.coords
            .chunks_exact(dim)
            .collect::<Vec<_>>()
            .binary_search_by(|row| lex_cmp(row, path))
            .map(|i| self.weights[i])
            .unwrap_or(0.0)
    }

    /// True when no atom of `self` coincides with an atom of `other`.
    pub fn support_disjoint(&self, other: &Self) -> bool {
        self.atoms().all(|(p, _)| other.mass_at(p) == 0.0)
    }

    /// True when no first-stage value of `self` is a first-stage value of
    /// `other`, so that no prefix of any length is shared.
    pub fn prefixes_disjoint(&self, other: &Self) -> bool {
        let first = |m: &Self| m.marginal(1).expect("horizon is at least one");
        first(self).support_disjoint(&first(other))
    }

    /// Law of the first `t` stages.
    pub fn marginal(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "marginal horizon {t} outside 1..={}",
                self.horizon
            )));
        }
        let dim = self.dim();
        let keep = t * self.d;
        let coords: Vec<f64> = self
            .coords
            .chunks_exact(dim)
            .flat_map(|row| row[..keep].iter().copied())
            .collect();
        Self::canonical(self.d, t, coords, self.weights.clone())
    }

    /// Weighted mixture `sum_k lambda_k part_k`.
    pub fn mixture(parts: &[Self], lambdas: &[f64]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty)?;
        if parts.len() != lambdas.len() {
            return Err(Error::DimensionMismatch {
                expected: parts.len(),
                got: lambdas.len(),
            });
        }
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (part, &lambda) in parts.iter().zip(lambdas) {
            first.same_shape(part)?;
            coords.extend_from_slice(&part.coords);
            weights.extend(part.weights.iter().map(|w| w * lambda));
        }
        Self::from_flat(first.d, first.horizon, coords, weights)
    }

    /// Uniform mixture of `parts`.
    pub fn uniform_mixture(parts: &[Self]) -> Result<Self> {
        let m = parts.len();
        Self::mixture(parts, &vec![1.0 / m as f64; m])
    }

    /// Applies `f` to every atom and re-canonicalizes.
    pub fn map_paths<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let dim = self.dim();
        let mut coords = vec![0.0; self.coords.len()];
        for (src, dst) in self.coords.chunks_exact(dim).zip(coords.chunks_exact_mut(dim)) {
            f(src, dst);
        }
        check_finite(&coords)?;
        Self::canonical(self.d, self.horizon, coords, self.weights.clone())
    }

    /// Largest sum-norm over the support.
    pub fn max_norm(&self) -> f64 {
        self.coords
            .chunks_exact(self.dim())
            .map(|p| sum_norm(p, self.d))
            .fold(0.0, f64::max)
    }
}

/// Translates every atom by `zeta`.
pub fn shift(m: &DiscretePathMeasure, zeta: &[f64]) -> Result<DiscretePathMeasure> {
    if zeta.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: zeta.len(),
        });
    }
    check_finite(zeta)?;
    m.map_paths(|src, dst| {
        for ((o, s), z) in dst.iter_mut().zip(src).zip(zeta) {
            *o = s + z;
        }
    })
}

/// Pushes `m` forward through the stopped truncation map: stages are kept
/// until the first stage leaving `[-R, R]^d`, from which on every stage is
/// replaced by `(R+1, ..., R+1)`.
pub fn truncate(m: &DiscretePathMeasure, radius: f64) -> Result<DiscretePathMeasure> {
    if !(radius >= 1.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("truncation radius {radius} must be >= 1")));
    }
    let d = m.d();
    m.map_paths(|src, dst| truncate_path(src, dst, d, radius))
}

pub(crate) fn truncate_path(src: &[f64], dst: &mut [f64], d: usize, radius: f64) {
    let mut exited = false;
    for (s, o) in src.chunks_exact(d).zip(dst.chunks_exact_mut(d)) {
        exited = exited || s.iter().any(|v| v.abs() > radius);
        if exited {
            o.fill(radius + 1.0);
        } else {
            o.copy_from_slice(s);
        }
    }
}

/// `p`-th moment `sum_i w_i ||x_i||^p`.
pub fn moment(m: &DiscretePathMeasure, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("moment order {p} must be >= 1")));
    }
    let d = m.d();
    let terms: Vec<f64> = m.atoms().map(|(x, w)| w * sum_norm(x, d).powf(p)).collect();
    Ok(pairwise_sum(&terms))
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// A set of sampled paths, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSamples {
    d: usize,
    horizon: usize,
    data: Vec<f64>,
}

impl PathSamples {
    pub fn new(d: usize, horizon: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 || horizon == 0 {
            return Err(Error::Shape(format!("d={d}, T={horizon} must be positive")));
        }
        if !data.len().is_multiple_of(d * horizon) {
            return Err(Error::Shape(format!(
                "{} coordinates do not split into paths of length {}",
                data.len(),
                d * horizon
            )));
        }
        check_finite(&data)?;
        Ok(Self { d, horizon, data })
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

    pub fn len(&self) -> usize {
        self.data.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        let dim = self.dim();
        &self.data[i * dim..(i + 1) * dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim())
    }
}
