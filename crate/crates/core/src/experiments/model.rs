//! Data-generating models and their discrete references.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::grid_dimension_factor;
use crate::gaussian::{GaussianMixture, SeededSampler};
use crate::path_measure::{DiscretePathMeasure, GridSpec, MeasureFile, PathSamples};

/// A law that can be sampled and discretized.
#[derive(Clone, Debug)]
pub enum Model {
    Mixture(GaussianMixture),
    Discrete(DiscretePathMeasure),
}

impl Model {
    pub fn d(&self) -> usize {
        match self {
            Self::Mixture(g) => g.d(),
            Self::Discrete(m) => m.d(),
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            Self::Mixture(g) => g.horizon(),
            Self::Discrete(m) => m.horizon(),
        }
    }

    /// `n` i.i.d. paths.
    pub fn sample(&self, s: &mut SeededSampler, n: usize) -> Result<PathSamples> {
        match self {
            Self::Mixture(g) => g.sample(s, n),
            Self::Discrete(m) => {
                let mut cdf = Vec::with_capacity(m.len());
                let mut acc = 0.0;
                for &w in m.weights() {
                    acc += w;
                    cdf.push(acc);
                }
                let mut data = Vec::with_capacity(n * m.dim());
                for _ in 0..n {
                    let u = s.uniform() * acc;
                    let i = cdf.partition_point(|&c| c <= u).min(m.len() - 1);
                    data.extend_from_slice(m.path(i));
                }
                PathSamples::new(m.d(), m.horizon(), data)
            }
        }
    }
}

/// Where an experiment takes its model from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Mixture(GaussianMixture),
    Measure(MeasureFile),
    /// Mixture JSON file, relative paths taken from the config directory.
    MixturePath(PathBuf),
    MeasurePath(PathBuf),
}

impl ModelSource {
    pub fn load(&self, base: Option<&FsPath>) -> Result<Model> {
        let resolve = |p: &PathBuf| match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.clone(),
        };
        Ok(match self {
            Self::Mixture(g) => Model::Mixture(g.clone()),
            Self::Measure(f) => Model::Discrete(f.clone().into_measure()?),
            Self::MixturePath(p) => {
                let p = resolve(p);
                let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                Model::Mixture(GaussianMixture::from_json(&text)?)
            }
            Self::MeasurePath(p) => Model::Discrete(DiscretePathMeasure::read(resolve(p))?),
        })
    }
}

/// Grid with about `resolution` cells in total: `delta = resolution^{-1/(D(d) T)}`.
pub fn reference_grid(d: usize, horizon: usize, resolution: u64) -> Result<GridSpec> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!("reference resolution {resolution} is too small")));
    }
    let r = 1.0 / (grid_dimension_factor(d) * horizon) as f64;
    GridSpec::new(libm::pow(resolution as f64, -r), d * horizon)
}

/// Discrete stand-in for the model: exact cell probabilities on
/// [`reference_grid`] for a mixture, the measure itself for a discrete model.
pub fn reference_measure(model: &Model, resolution: u64) -> Result<DiscretePathMeasure> {
    match model {
        Model::Discrete(m) => Ok(m.clone()),
        Model::Mixture(g) => g.quantize(&reference_grid(g.d(), g.horizon(), resolution)?),
    }
}
