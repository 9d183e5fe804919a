//! Classical and adapted optimal transport between discrete path measures,
//! together with the empirical estimators and convergence experiments built
//! on top of them.
//!
//! - [`path_measure`]: measures on `T`-stage paths, prefix trees, grids.
//! - [`gaussian`]: seeded Gaussian sampling and Gaussian mixture models.
//! - [`transport`]: exact discrete OT, `W1`, `TV` and `TV1`.
//! - [`adapted`]: `AW1` and `AV1` by backward induction, a bicausal LP oracle,
//!   and inequality checks.
//! - [`estimators`]: empirical, adapted and smoothed-adapted estimators.
//! - [`experiments`]: rate experiments, bandwidth sweeps and envelopes.
//! - [`verify`]: closed-form example suite.

pub mod adapted;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod gaussian;
pub mod path_measure;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use path_measure::{DiscretePathMeasure, GridSpec, Path, PathSamples, PrefixTree};
