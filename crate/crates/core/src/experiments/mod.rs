//! Convergence-rate experiments, bandwidth sweeps and envelope constants.
//!
//! Distances to a continuous model are measured against a discrete reference:
//! the exact cell probabilities of the model on a fine grid.

pub mod config;
pub mod convergence;
pub mod envelope;
pub mod model;
pub mod regression;
pub mod sweep;

pub use config::{ExperimentConfig, NSchedule, OutputPaths, RateBand};
pub use convergence::{
    count_inversions, deviation_profile, mean_stderr, records_csv, reference_stability, run_convergence,
    run_convergence_with, surrogate_stability, trial_estimator, trial_sampler, ConvergenceRun, DeviationProfile,
    DeviationRow, NSummary, RateReport, StabilityCheck, TrialRecord,
};
pub use envelope::{theoretical_envelope, Envelope};
pub use model::{reference_grid, reference_measure, Model, ModelSource};
pub use regression::{fit_loglog, LogLogFit};
pub use sweep::{bandwidth_sweep, SweepReport, SweepRow};
