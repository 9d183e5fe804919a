//! JSON file formats for measures and sample sets.

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use super::{DiscretePathMeasure, PathSamples};
use crate::error::{Error, Result};

/// One weighted atom, stored as a `T x d` array of stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub w: f64,
    pub path: Vec<Vec<f64>>,
}

/// `{ "d": .., "T": .., "atoms": [ { "w": .., "path": [[..], ..] } ] }`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub atoms: Vec<AtomRecord>,
}

/// `{ "d": .., "T": .., "samples": [ [[..], ..], .. ] }`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplesFile {
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub samples: Vec<Vec<Vec<f64>>>,
}

fn flatten_stages(stages: &[Vec<f64>], d: usize, horizon: usize) -> Result<Vec<f64>> {
    if stages.len() != horizon || stages.iter().any(|s| s.len() != d) {
        return Err(Error::Shape(format!("path is not a {horizon} x {d} array")));
    }
    Ok(stages.concat())
}

fn unflatten(coords: &[f64], d: usize) -> Vec<Vec<f64>> {
    coords.chunks_exact(d).map(<[f64]>::to_vec).collect()
}

impl MeasureFile {
    pub fn into_measure(self) -> Result<DiscretePathMeasure> {
        let mut coords = Vec::with_capacity(self.atoms.len() * self.d * self.horizon);
        let mut weights = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            coords.extend(flatten_stages(&a.path, self.d, self.horizon)?);
            weights.push(a.w);
        }
        DiscretePathMeasure::from_flat(self.d, self.horizon, coords, weights)
    }
}

impl From<&DiscretePathMeasure> for MeasureFile {
    fn from(m: &DiscretePathMeasure) -> Self {
        Self {
            d: m.d(),
            horizon: m.horizon(),
            atoms: m
                .atoms()
                .map(|(p, w)| AtomRecord {
                    w,
                    path: unflatten(p, m.d()),
                })
                .collect(),
        }
    }
}

impl SamplesFile {
    pub fn into_samples(self) -> Result<PathSamples> {
        let mut data = Vec::with_capacity(self.samples.len() * self.d * self.horizon);
        for s in &self.samples {
            data.extend(flatten_stages(s, self.d, self.horizon)?);
        }
        PathSamples::new(self.d, self.horizon, data)
    }
}

impl From<&PathSamples> for SamplesFile {
    fn from(s: &PathSamples) -> Self {
        Self {
            d: s.d(),
            horizon: s.horizon(),
            samples: s.iter().map(|p| unflatten(p, s.d())).collect(),
        }
    }
}

impl DiscretePathMeasure {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<MeasureFile>(text)?.into_measure()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MeasureFile::from(self)).expect("measure serializes")
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: impl AsRef<FsPath>) -> Result<()> {
        std::fs::write(&path, self.to_json() + "\n").map_err(|e| Error::io(&path, e))
    }
}

impl PathSamples {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<SamplesFile>(text)?.into_samples()
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SamplesFile::from(self)).expect("samples serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_round_trip() {
        let text = r#"{"d":1,"T":2,"atoms":[{"w":0.5,"path":[[0.0],[1.0]]},{"w":0.5,"path":[[0.0],[-1.0]]}]}"#;
        let m = DiscretePathMeasure::from_json(text).unwrap();
        assert_eq!(m.len(), 2);
        let back = DiscretePathMeasure::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_malformed_paths() {
        let text = r#"{"d":1,"T":2,"atoms":[{"w":1.0,"path":[[0.0]]}]}"#;
        assert!(matches!(DiscretePathMeasure::from_json(text), Err(Error::Shape(_))));
        let text = r#"{"d":1,"T":1,"atoms":[{"w":0.9,"path":[[0.0]]}]}"#;
        assert!(matches!(DiscretePathMeasure::from_json(text), Err(Error::NotNormalized { .. })));
        assert!(matches!(DiscretePathMeasure::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn samples_round_trip() {
        let s = PathSamples::new(2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(PathSamples::from_json(&s.to_json()).unwrap(), s);
    }
}
