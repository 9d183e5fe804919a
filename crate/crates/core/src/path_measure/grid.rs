//! Uniform cube partition of `R^{dT}` and the midpoint map.

use serde::{Deserialize, Serialize};

use super::DiscretePathMeasure;
use crate::error::{Error, Result};

/// Relative slack used when `1/delta` is an integer up to rounding, so that
/// `delta = 256^(-1/4)` yields `G = 4` rather than `5`.
const INTEGER_SNAP: f64 = 1e-9;

/// Uniform grid with cell side `1/G`, `G = ceil(1/delta)`.
///
/// Cells are half-open, `[z/G, (z+1)/G)` in every coordinate, and each point
/// maps to the midpoint `(z + 1/2)/G` of its cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    delta: f64,
    g: u64,
    dim: usize,
}

impl GridSpec {
    pub fn new(delta: f64, dim: usize) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("grid size {delta} must be positive")));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("grid dimension must be positive".into()));
        }
        let inv = 1.0 / delta;
        let nearest = inv.round();
        let g = if nearest >= 1.0 && (inv - nearest).abs() <= INTEGER_SNAP * nearest {
            nearest
        } else {
            inv.ceil()
        };
        if g > 1e15 {
            return Err(Error::InvalidParameter(format!("grid size {delta} is too fine")));
        }
        Ok(Self {
            delta,
            g: g as u64,
            dim,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of cells per unit length.
    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half the cell side, `1/(2G)`.
    pub fn half_cell(&self) -> f64 {
        0.5 / self.g as f64
    }

    /// Integer index of the cell containing `x`.
    #[inline]
    pub fn cell_index(&self, x: f64) -> f64 {
        (x * self.g as f64).floor()
    }

    /// Midpoint of the cell containing `x`.
    #[inline]
    pub fn midpoint(&self, x: f64) -> f64 {
        (self.cell_index(x) + 0.5) / self.g as f64
    }

    /// True when `x` is the computed midpoint of its own cell.
    pub fn is_midpoint(&self, x: f64) -> bool {
        self.midpoint(x) == x
    }
}

/// Replaces every coordinate by its cell midpoint and merges collisions.
pub fn adapted_project(g: &GridSpec, m: &DiscretePathMeasure) -> Result<DiscretePathMeasure> {
    if g.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: g.dim(),
        });
    }
    m.map_paths(|src, dst| {
        for (o, &s) in dst.iter_mut().zip(src) {
            *o = g.midpoint(s);
        }
    })
}
