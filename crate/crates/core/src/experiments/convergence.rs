//! Seeded convergence runs: distances from the reference to an estimator over
//! a schedule of sample sizes and trials.
//!
//! Every trial draws from its own stream, derived from `(trial, estimator, N)`,
//! so results do not depend on scheduling. Aggregates use pairwise summation
//! over trial-ordered values.

use std::path::Path as FsPath;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, RateBand};
use super::envelope::{theoretical_envelope, Envelope};
use super::model::{reference_grid, reference_measure, Model};
use super::regression::{fit_loglog, LogLogFit};
use crate::adapted::aw1_trees;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, ResolvedSpec};
use crate::gaussian::{stream_id, SeededSampler};
use crate::path_measure::{disintegrate, moment, pairwise_sum, DiscretePathMeasure, PrefixTree};

/// One row of the per-trial CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub estimator: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub distance: f64,
    pub sigma: Option<f64>,
    pub delta: Option<f64>,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub values: Vec<f64>,
    pub sigma: Option<f64>,
    pub delta: Option<f64>,
    pub envelope: Option<Envelope>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub estimator: String,
    pub m: usize,
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    pub reference_atoms: usize,
    pub reference_delta: Option<f64>,
    /// The estimator is represented by a finite surrogate.
    pub surrogate: bool,
    pub per_n: Vec<NSummary>,
    pub fit: Option<LogLogFit>,
    pub theoretical_slope: f64,
    pub inversions: usize,
    pub envelope_p: f64,
    pub band: Option<RateBand>,
    pub slope_in_band: Option<bool>,
    pub passed: Option<bool>,
}

impl RateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceRun {
    pub records: Vec<TrialRecord>,
    pub report: RateReport,
}

impl ConvergenceRun {
    pub fn csv(&self) -> Result<String> {
        records_csv(&self.records)
    }

    /// Writes the CSV and report JSON to whichever paths are given.
    pub fn write(&self, csv: Option<&FsPath>, report: Option<&FsPath>) -> Result<()> {
        if let Some(p) = csv {
            std::fs::write(p, self.csv()?).map_err(|e| Error::io(p, e))?;
        }
        if let Some(p) = report {
            std::fs::write(p, self.report.to_json()).map_err(|e| Error::io(p, e))?;
        }
        Ok(())
    }
}

pub fn records_csv(records: &[TrialRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Stream of trial `trial` at sample size `n`.
pub fn trial_sampler(seed: u64, kind: EstimatorKind, n: usize, trial: usize) -> SeededSampler {
    SeededSampler::new(seed, stream_id(&[trial as u64, kind.id(), n as u64]))
}

/// Draws the samples of one trial and builds the estimator.
pub fn trial_estimator(model: &Model, spec: &ResolvedSpec, seed: u64, trial: usize) -> Result<DiscretePathMeasure> {
    let base = trial_sampler(seed, spec.kind, spec.n, trial);
    let samples = model.sample(&mut base.substream(1), spec.n)?;
    spec.build(&samples, &base.substream(2))
}

fn distance_to(reference: &PrefixTree, estimator: &DiscretePathMeasure) -> Result<f64> {
    Ok(aw1_trees(reference, &disintegrate(estimator))?.root())
}

/// Mean and standard error with pairwise summation.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1.0)).sqrt() / n.sqrt())
}

/// Number of consecutive pairs where the later value is larger.
pub fn count_inversions(means: &[f64]) -> usize {
    means.windows(2).filter(|w| w[1] > w[0]).count()
}

/// Loads the model and reference, then runs every `(N, trial)`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceRun> {
    let model = cfg.load_model()?;
    let reference = reference_measure(&model, cfg.reference_resolution)?;
    run_convergence_with(cfg, &model, &reference)
}

/// Runs against an already computed reference.
pub fn run_convergence_with(cfg: &ExperimentConfig, model: &Model, reference: &DiscretePathMeasure) -> Result<ConvergenceRun> {
    cfg.validate()?;
    let (d, horizon) = (model.d(), model.horizon());
    let ns = cfg.n_schedule.values()?;
    let specs: Vec<ResolvedSpec> = ns
        .iter()
        .map(|&n| cfg.estimator.resolve(n, d, horizon))
        .collect::<Result<_>>()?;
    let ref_tree = disintegrate(reference);

    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    let records: Vec<TrialRecord> = tasks
        .par_iter()
        .map(|&(i, trial)| {
            let spec = &specs[i];
            let start = Instant::now();
            let run = || -> Result<f64> {
                let est = trial_estimator(model, spec, cfg.seed, trial)?;
                distance_to(&ref_tree, &est)
            };
            let distance = run().map_err(|e| Error::Trial {
                n: spec.n,
                trial,
                source: Box::new(e),
            })?;
            Ok(TrialRecord {
                estimator: spec.kind.name().to_string(),
                n: spec.n,
                trial,
                seed: cfg.seed,
                distance,
                sigma: spec.sigma,
                delta: spec.grid.as_ref().map(|g| g.delta()),
                wall_ms: if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 },
            })
        })
        .collect::<Result<_>>()?;

    let p = cfg.envelope_p.unwrap_or((d * horizon) as f64 + 3.0);
    let mp = moment(reference, p)?;
    let k_bound = reference.max_norm();
    let per_n: Vec<NSummary> = specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let values: Vec<f64> = records[i * cfg.trials..(i + 1) * cfg.trials]
                .iter()
                .map(|r| r.distance)
                .collect();
            let (mean, stderr) = mean_stderr(&values);
            let envelope = match spec.sigma {
                Some(s) => Some(theoretical_envelope(s, p, mp, k_bound, d, horizon)?),
                None => None,
            };
            Ok(NSummary {
                n: spec.n,
                mean,
                stderr,
                values,
                sigma: spec.sigma,
                delta: spec.grid.as_ref().map(|g| g.delta()),
                envelope,
            })
        })
        .collect::<Result<_>>()?;

    let xs: Vec<f64> = per_n.iter().map(|s| s.n as f64).collect();
    let means: Vec<f64> = per_n.iter().map(|s| s.mean).collect();
    let fit = fit_loglog(&xs, &means).ok();
    let inversions = count_inversions(&means);
    let slope_in_band = cfg
        .band
        .as_ref()
        .map(|b| fit.is_some_and(|f| f.slope >= b.slope[0] && f.slope <= b.slope[1]));
    let passed = cfg
        .band
        .as_ref()
        .map(|b| slope_in_band == Some(true) && inversions <= b.max_inversions);
    let reference_delta = match model {
        Model::Mixture(_) => Some(reference_grid(d, horizon, cfg.reference_resolution)?.delta()),
        Model::Discrete(_) => None,
    };
    let report = RateReport {
        estimator: cfg.estimator.kind.name().to_string(),
        m: cfg.estimator.m,
        d,
        horizon,
        trials: cfg.trials,
        seed: cfg.seed,
        reference_atoms: reference.len(),
        reference_delta,
        surrogate: cfg.estimator.kind == EstimatorKind::SEmp,
        per_n,
        fit,
        theoretical_slope: -specs[0].rate,
        inversions,
        envelope_p: p,
        band: cfg.band.clone(),
        slope_in_band,
        passed,
    };
    Ok(ConvergenceRun { records, report })
}

/// Mean distance before and after doubling one discretization parameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityCheck {
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub base: f64,
    pub doubled: f64,
    pub relative_change: f64,
}

impl StabilityCheck {
    fn new(n: usize, base: &[f64], doubled: &[f64]) -> Self {
        let (b, _) = mean_stderr(base);
        let (d, _) = mean_stderr(doubled);
        Self {
            n,
            trials: base.len(),
            base: b,
            doubled: d,
            relative_change: (d - b).abs() / b.abs(),
        }
    }
}

/// Effect of doubling the surrogate size `K` of a smoothed empirical estimator
/// at sample size `n`, with samples and noise shared between the two.
pub fn surrogate_stability(cfg: &ExperimentConfig, model: &Model, reference: &DiscretePathMeasure, n: usize) -> Result<StabilityCheck> {
    if cfg.estimator.kind != EstimatorKind::SEmp {
        return Err(Error::InvalidParameter("surrogate stability needs an SEmp estimator".into()));
    }
    let spec = cfg.estimator.resolve(n, model.d(), model.horizon())?;
    let mut doubled_spec = spec.clone();
    doubled_spec.surrogate = spec.surrogate.map(|k| 2 * k);
    let tree = disintegrate(reference);
    let pairs: Vec<(f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let a = distance_to(&tree, &trial_estimator(model, &spec, cfg.seed, trial)?)?;
            let b = distance_to(&tree, &trial_estimator(model, &doubled_spec, cfg.seed, trial)?)?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(StabilityCheck::new(n, &a, &b))
}

/// Effect of doubling the reference resolution, with identical estimators.
pub fn reference_stability(cfg: &ExperimentConfig, model: &Model, n: usize) -> Result<StabilityCheck> {
    let coarse = disintegrate(&reference_measure(model, cfg.reference_resolution)?);
    let fine = disintegrate(&reference_measure(model, cfg.reference_resolution.saturating_mul(2))?);
    let spec = cfg.estimator.resolve(n, model.d(), model.horizon())?;
    let pairs: Vec<(f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let est = trial_estimator(model, &spec, cfg.seed, trial)?;
            Ok((distance_to(&coarse, &est)?, distance_to(&fine, &est)?))
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(StabilityCheck::new(n, &a, &b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub x: f64,
    pub exceed: usize,
    pub trials: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationProfile {
    pub rows: Vec<DeviationRow>,
    /// Per threshold: exceedance counts never rise by more than one trial as
    /// `N` grows.
    pub non_increasing: Vec<(f64, bool)>,
}

/// Fraction of trials whose distance is at least `x` above the mean at the
/// same `N`, for every `N` and threshold.
pub fn deviation_profile(report: &RateReport, thresholds: &[f64]) -> DeviationProfile {
    let mut rows = Vec::new();
    for s in &report.per_n {
        for &x in thresholds {
            let exceed = s.values.iter().filter(|&&v| v >= x + s.mean).count();
            rows.push(DeviationRow {
                n: s.n,
                x,
                exceed,
                trials: s.values.len(),
                frequency: exceed as f64 / s.values.len() as f64,
            });
        }
    }
    let k = thresholds.len();
    let non_increasing = thresholds
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let counts: Vec<usize> = rows.iter().skip(j).step_by(k).map(|r| r.exceed).collect();
            (x, counts.windows(2).all(|w| w[1] <= w[0] + 1))
        })
        .collect();
    DeviationProfile { rows, non_increasing }
}
