//! Distance between a law and its Gaussian smoothing, across bandwidths.
//!
//! Both laws are discretized on the same grid: exact cell probabilities of the
//! mixture and of its smoothing, or for a discrete law the law itself against
//! the cell probabilities of Gaussians placed on its atoms.

use rayon::prelude::*;
use serde::Serialize;

use super::model::{reference_grid, Model};
use super::regression::{fit_loglog, LogLogFit};
use crate::adapted::aw1_trees;
use crate::error::{Error, Result};
use crate::gaussian::GaussianMixture;
use crate::path_measure::{adapted_project, disintegrate};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub grid_delta: f64,
    pub rows: Vec<SweepRow>,
    /// Fit of `log distance` on `log sigma` over positive bandwidths.
    pub fit: Option<LogLogFit>,
    /// Distances never grow as `sigma` shrinks.
    pub non_increasing: bool,
}

/// `AW1` between the discretized model and its discretized smoothing for
/// every bandwidth in `sigmas` (which must be decreasing).
pub fn bandwidth_sweep(model: &Model, sigmas: &[f64], resolution: u64) -> Result<SweepReport> {
    if sigmas.windows(2).any(|w| w[1] >= w[0]) || sigmas.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::InvalidParameter(format!("bandwidths must be decreasing and >= 0, got {sigmas:?}")));
    }
    let grid = reference_grid(model.d(), model.horizon(), resolution)?;
    let base = match model {
        Model::Mixture(g) => g.quantize(&grid)?,
        Model::Discrete(m) => adapted_project(&grid, m)?,
    };
    let base_tree = disintegrate(&base);
    let rows: Vec<SweepRow> = sigmas
        .par_iter()
        .map(|&sigma| {
            if sigma == 0.0 {
                return Ok(SweepRow { sigma, distance: 0.0 });
            }
            let smooth = match model {
                Model::Mixture(g) => g.smoothed(sigma)?.quantize(&grid)?,
                Model::Discrete(m) => GaussianMixture::around_atoms(m, sigma)?.quantize(&grid)?,
            };
            let distance = aw1_trees(&base_tree, &disintegrate(&smooth))?.root();
            Ok(SweepRow { sigma, distance })
        })
        .collect::<Result<_>>()?;
    let positive: Vec<&SweepRow> = rows.iter().filter(|r| r.sigma > 0.0).collect();
    let xs: Vec<f64> = positive.iter().map(|r| r.sigma).collect();
    let ys: Vec<f64> = positive.iter().map(|r| r.distance).collect();
    Ok(SweepReport {
        grid_delta: grid.delta(),
        fit: fit_loglog(&xs, &ys).ok(),
        non_increasing: rows.windows(2).all(|w| w[1].distance <= w[0].distance),
        rows,
    })
}
