//! Experiment configuration files.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use super::model::{Model, ModelSource};
use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;

/// Sample sizes of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NSchedule {
    List(Vec<usize>),
    /// `start, start * factor, ...` with `count` entries.
    Geometric { start: usize, factor: usize, count: usize },
}

impl NSchedule {
    pub fn values(&self) -> Result<Vec<usize>> {
        let ns = match self {
            Self::List(v) => v.clone(),
            Self::Geometric { start, factor, count } => {
                let mut out = Vec::with_capacity(*count);
                let mut n = *start;
                for _ in 0..*count {
                    out.push(n);
                    n = n
                        .checked_mul(*factor)
                        .ok_or_else(|| Error::InvalidParameter("N schedule overflows".into()))?;
                }
                out
            }
        };
        if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "N schedule must be positive and strictly increasing, got {ns:?}"
            )));
        }
        Ok(ns)
    }
}

/// Acceptance band for a convergence run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBand {
    /// Inclusive range for the fitted log-log slope.
    pub slope: [f64; 2],
    /// Allowed increases of the mean distance between consecutive `N`.
    #[serde(default = "one")]
    pub max_inversions: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    pub estimator: EstimatorSpec,
    pub n_schedule: NSchedule,
    pub trials: usize,
    pub seed: u64,
    /// Approximate cell count of the reference grid for continuous models.
    pub reference_resolution: u64,
    #[serde(default)]
    pub band: Option<RateBand>,
    /// Moment order used for the envelope constants; defaults to `dT + 3`.
    #[serde(default)]
    pub envelope_p: Option<f64>,
    /// Record wall-clock times. Off by default so outputs are byte-stable.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub outputs: OutputPaths,
    /// Directory that relative model paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(FsPath::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.n_schedule.values()?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load_model(&self) -> Result<Model> {
        self.model.load(self.base_dir.as_deref())
    }
}
