//! Estimators of a path law built from `N` i.i.d. sample paths.
//!
//! - `Emp`: the empirical measure.
//! - `AEmp`: every sample snapped to the midpoint of its grid cell.
//! - `AS1Emp`: samples perturbed by `N(0, sigma^2 I)` noise, then snapped.
//! - `ASEmp`: `M` independent noisy snaps, the `m`-th translated by `zeta^m`,
//!   mixed uniformly. Distinct translates keep the parts on disjoint grids.
//! - `SEmp`: the smoothed empirical measure `mu^N * N_sigma`. It is continuous,
//!   so it is represented by a surrogate: `K` draws from it projected on a grid
//!   much finer than `sigma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::SeededSampler;
use crate::path_measure::{adapted_project, shift, DiscretePathMeasure, GridSpec, PathSamples};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    Emp,
    SEmp,
    AEmp,
    AS1Emp,
    ASEmp,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [Self::Emp, Self::SEmp, Self::AEmp, Self::AS1Emp, Self::ASEmp];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Emp => "Emp",
            Self::SEmp => "SEmp",
            Self::AEmp => "AEmp",
            Self::AS1Emp => "AS1Emp",
            Self::ASEmp => "ASEmp",
        }
    }

    /// Stable numeric id used when deriving random streams.
    pub fn id(&self) -> u64 {
        match self {
            Self::Emp => 1,
            Self::SEmp => 2,
            Self::AEmp => 3,
            Self::AS1Emp => 4,
            Self::ASEmp => 5,
        }
    }

    pub fn uses_grid(&self) -> bool {
        matches!(self, Self::AEmp | Self::AS1Emp | Self::ASEmp)
    }

    pub fn uses_noise(&self) -> bool {
        matches!(self, Self::SEmp | Self::AS1Emp | Self::ASEmp)
    }

    /// Default decay exponent `r` of `sigma_N` and `delta_N`.
    pub fn rate(&self, d: usize, horizon: usize) -> f64 {
        match self {
            Self::Emp => 0.0,
            Self::SEmp => 1.0 / (d * horizon + 2) as f64,
            _ => 1.0 / (grid_dimension_factor(d) * horizon) as f64,
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown estimator {s}")))
    }
}

/// `d` for `d >= 3`, `d + 1` for `d = 1, 2`.
pub fn grid_dimension_factor(d: usize) -> usize {
    if d >= 3 {
        d
    } else {
        d + 1
    }
}

/// How a bandwidth or grid size depends on `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Schedule {
    /// The same value for every `N`.
    Fixed { value: f64 },
    /// `scale * N^(-exponent)`; the exponent defaults to the estimator's rate.
    Rate {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        exponent: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for Schedule {
    fn default() -> Self {
        Self::Rate {
            scale: 1.0,
            exponent: None,
        }
    }
}

impl Schedule {
    pub fn resolve(&self, n: usize, default_rate: f64) -> Result<f64> {
        let v = match self {
            Self::Fixed { value } => *value,
            Self::Rate { scale, exponent } => scale * libm::pow(n as f64, -exponent.unwrap_or(default_rate)),
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("schedule resolved to {v} at N={n}")));
        }
        Ok(v)
    }
}

/// Translations `zeta^m` for the parts of `ASEmp`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum ZetaScheme {
    /// `zeta^m = m / (M + 1) * 1/(2G) * (1, ..., 1)`.
    #[default]
    Diagonal,
    /// A single untranslated part; only valid for `M = 1`.
    Zero,
    Explicit { vectors: Vec<Vec<f64>> },
}

/// The diagonal translations for `M` parts on grid `g`.
pub fn zeta_default(m: usize, g: &GridSpec) -> Vec<Vec<f64>> {
    (1..=m)
        .map(|k| vec![k as f64 / (m + 1) as f64 * g.half_cell(); g.dim()])
        .collect()
}

impl ZetaScheme {
    pub fn resolve(&self, m: usize, g: &GridSpec) -> Result<Vec<Vec<f64>>> {
        let zetas = match self {
            Self::Diagonal => zeta_default(m, g),
            Self::Zero => {
                if m != 1 {
                    return Err(Error::InvalidParameter("the zero translation needs M = 1".into()));
                }
                return Ok(vec![vec![0.0; g.dim()]]);
            }
            Self::Explicit { vectors } => vectors.clone(),
        };
        validate_zetas(&zetas, m, g)?;
        Ok(zetas)
    }
}

/// Checks count, length, range `(0, 1/(2G))` and pairwise distinctness.
pub fn validate_zetas(zetas: &[Vec<f64>], m: usize, g: &GridSpec) -> Result<()> {
    if zetas.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: zetas.len(),
        });
    }
    let h = g.half_cell();
    for (i, z) in zetas.iter().enumerate() {
        if z.len() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                got: z.len(),
            });
        }
        if !z.iter().all(|&v| v > 0.0 && v < h) {
            return Err(Error::ZetaOutOfRange(i));
        }
        if zetas[..i].contains(z) {
            return Err(Error::DuplicateZeta(i));
        }
    }
    Ok(())
}

/// Full description of an estimator, resolved against `N` at build time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    /// Number of noisy copies, `ASEmp` only.
    #[serde(default = "one_usize")]
    pub m: usize,
    #[serde(default)]
    pub sigma: Schedule,
    #[serde(default)]
    pub delta: Schedule,
    #[serde(default)]
    pub zeta: ZetaScheme,
    /// Surrogate draws for `SEmp` as a multiple of `N`.
    #[serde(default = "sixteen")]
    pub surrogate_factor: usize,
    /// Surrogate grid size for `SEmp` as a fraction of `sigma_N`.
    #[serde(default = "quarter")]
    pub fine_fraction: f64,
}

fn one_usize() -> usize {
    1
}

fn sixteen() -> usize {
    16
}

fn quarter() -> f64 {
    0.25
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind) -> Self {
        Self {
            kind,
            m: 1,
            sigma: Schedule::default(),
            delta: Schedule::default(),
            zeta: ZetaScheme::default(),
            surrogate_factor: 16,
            fine_fraction: 0.25,
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    /// Concrete parameters at sample size `n`.
    pub fn resolve(&self, n: usize, d: usize, horizon: usize) -> Result<ResolvedSpec> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        if self.m == 0 || (self.m > 1 && self.kind != EstimatorKind::ASEmp) {
            return Err(Error::InvalidParameter(format!("M={} is not valid for {}", self.m, self.kind)));
        }
        let rate = self.kind.rate(d, horizon);
        let dim = d * horizon;
        let sigma = if self.kind.uses_noise() {
            Some(self.sigma.resolve(n, rate)?)
        } else {
            None
        };
        let grid = match self.kind {
            k if k.uses_grid() => Some(GridSpec::new(self.delta.resolve(n, rate)?, dim)?),
            EstimatorKind::SEmp => {
                if !(self.fine_fraction > 0.0) {
                    return Err(Error::InvalidParameter("fine grid fraction must be positive".into()));
                }
                Some(GridSpec::new(sigma.expect("smoothing bandwidth") * self.fine_fraction, dim)?)
            }
            _ => None,
        };
        let zetas = match (self.kind, &grid) {
            (EstimatorKind::ASEmp, Some(g)) => self.zeta.resolve(self.m, g)?,
            _ => Vec::new(),
        };
        let surrogate = (self.kind == EstimatorKind::SEmp).then(|| self.surrogate_factor.max(1) * n);
        Ok(ResolvedSpec {
            kind: self.kind,
            n,
            rate,
            sigma,
            grid,
            zetas,
            surrogate,
        })
    }
}

/// Parameters of one estimator at one sample size.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedSpec {
    pub kind: EstimatorKind,
    pub n: usize,
    pub rate: f64,
    pub sigma: Option<f64>,
    /// Projection grid; for `SEmp` the fine surrogate grid.
    pub grid: Option<GridSpec>,
    pub zetas: Vec<Vec<f64>>,
    pub surrogate: Option<usize>,
}

impl ResolvedSpec {
    /// Builds the estimator from `samples`, drawing noise from `noise`.
    pub fn build(&self, samples: &PathSamples, noise: &SeededSampler) -> Result<DiscretePathMeasure> {
        if samples.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: samples.len(),
            });
        }
        let grid = || self.grid.as_ref().expect("grid resolved for this kind");
        let sigma = || self.sigma.expect("bandwidth resolved for this kind");
        match self.kind {
            EstimatorKind::Emp => build_emp(samples),
            EstimatorKind::AEmp => build_a_emp(samples, grid()),
            EstimatorKind::AS1Emp => build_as1_emp(samples, noise, sigma(), grid()),
            EstimatorKind::ASEmp => build_as_emp(samples, noise, sigma(), grid(), &self.zetas),
            EstimatorKind::SEmp => build_s_emp_surrogate(
                samples,
                noise,
                sigma(),
                grid(),
                self.surrogate.expect("surrogate size resolved"),
            ),
        }
    }
}

/// Uniform weights `1/N` on the samples, duplicates merged.
pub fn build_emp(samples: &PathSamples) -> Result<DiscretePathMeasure> {
    DiscretePathMeasure::empirical(samples)
}

/// Empirical measure pushed through the grid midpoint map.
pub fn build_a_emp(samples: &PathSamples, g: &GridSpec) -> Result<DiscretePathMeasure> {
    adapted_project(g, &build_emp(samples)?)
}

fn check_bandwidth(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("bandwidth {sigma} must be positive")));
    }
    Ok(())
}

/// Projected noisy copy of the samples using the noise stream `noise`.
fn noisy_projection(samples: &PathSamples, noise: &mut SeededSampler, sigma: f64, g: &GridSpec) -> Result<DiscretePathMeasure> {
    if g.dim() != samples.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            got: g.dim(),
        });
    }
    let data: Vec<f64> = samples.data().iter().map(|&x| g.midpoint(x + sigma * noise.normal())).collect();
    DiscretePathMeasure::empirical(&PathSamples::new(samples.d(), samples.horizon(), data)?)
}

/// Noise-then-project estimator; uses the first part stream of `noise`.
pub fn build_as1_emp(samples: &PathSamples, noise: &SeededSampler, sigma: f64, g: &GridSpec) -> Result<DiscretePathMeasure> {
    check_bandwidth(sigma)?;
    noisy_projection(samples, &mut noise.substream(0), sigma, g)
}

/// The `M` translated parts of the `ASEmp` estimator; part `m` uses noise
/// stream `m` and translation `zetas[m]`.
pub fn as_emp_parts(samples: &PathSamples, noise: &SeededSampler, sigma: f64, g: &GridSpec, zetas: &[Vec<f64>]) -> Result<Vec<DiscretePathMeasure>> {
    check_bandwidth(sigma)?;
    if zetas.is_empty() {
        return Err(Error::InvalidParameter("at least one translation is required".into()));
    }
    let untranslated = zetas.len() == 1 && zetas[0].iter().all(|&z| z == 0.0);
    if !untranslated {
        validate_zetas(zetas, zetas.len(), g)?;
    }
    zetas
        .iter()
        .enumerate()
        .map(|(m, z)| {
            let part = noisy_projection(samples, &mut noise.substream(m as u64), sigma, g)?;
            shift(&part, z)
        })
        .collect()
}

/// Uniform mixture of the translated noisy projections.
pub fn build_as_emp(samples: &PathSamples, noise: &SeededSampler, sigma: f64, g: &GridSpec, zetas: &[Vec<f64>]) -> Result<DiscretePathMeasure> {
    DiscretePathMeasure::uniform_mixture(&as_emp_parts(samples, noise, sigma, g, zetas)?)
}

/// Discrete stand-in for `mu^N * N_sigma`: `k` draws, the `i`-th centered at
/// sample `i mod N` plus fresh noise, projected on the fine grid.
///
/// Cycling through the samples gives each atom exactly `k / N` draws when `N`
/// divides `k`, which removes the resampling noise of the mixture weights.
pub fn build_s_emp_surrogate(samples: &PathSamples, noise: &SeededSampler, sigma: f64, fine: &GridSpec, k: usize) -> Result<DiscretePathMeasure> {
    check_bandwidth(sigma)?;
    let n = samples.len();
    if k < n {
        return Err(Error::InvalidParameter(format!("surrogate size {k} is below N={n}")));
    }
    if fine.dim() != samples.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            got: fine.dim(),
        });
    }
    let mut s = noise.substream(0);
    let mut data = Vec::with_capacity(k * samples.dim());
    for i in 0..k {
        for &x in samples.get(i % n) {
            data.push(fine.midpoint(x + sigma * s.normal()));
        }
    }
    DiscretePathMeasure::empirical(&PathSamples::new(samples.d(), samples.horizon(), data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(d: usize, t: usize, data: &[f64]) -> PathSamples {
        PathSamples::new(d, t, data.to_vec()).unwrap()
    }

    #[test]
    fn empirical_merges() {
        let e = build_emp(&samples(1, 1, &[1.0])).unwrap();
        assert_eq!(e.len(), 1);
        let e = build_emp(&samples(1, 1, &[1.0, 2.0, 1.0, 3.0])).unwrap();
        let mut w = e.weights().to_vec();
        w.sort_by(f64::total_cmp);
        assert_eq!(w, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn adapted_empirical_on_midpoints_is_empirical() {
        let g = GridSpec::new(0.5, 2).unwrap();
        let s = samples(1, 2, &[0.25, 0.75, -0.25, 0.25]);
        assert_eq!(build_a_emp(&s, &g).unwrap(), build_emp(&s).unwrap());
        let s = samples(1, 2, &[0.1, 0.7, 0.2, 0.6, 0.9, 0.1]);
        let a = build_a_emp(&s, &g).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.coords().iter().all(|&x| g.is_midpoint(x)));
    }

    #[test]
    fn rates() {
        assert_eq!(EstimatorKind::SEmp.rate(1, 2), 0.25);
        assert_eq!(EstimatorKind::AS1Emp.rate(1, 2), 0.25);
        assert_eq!(EstimatorKind::ASEmp.rate(2, 2), 1.0 / 6.0);
        assert_eq!(EstimatorKind::AEmp.rate(3, 2), 1.0 / 6.0);
        assert_eq!(EstimatorKind::SEmp.rate(3, 2), 0.125);
    }

    #[test]
    fn default_translations() {
        let g = GridSpec::new(0.25, 2).unwrap();
        let z = zeta_default(1, &g);
        assert_eq!(z, vec![vec![0.5 / 8.0; 2]]);
        let z = zeta_default(10, &g);
        validate_zetas(&z, 10, &g).unwrap();
        assert!(z.iter().flatten().all(|&v| v > 0.0 && v < g.half_cell()));
    }

    #[test]
    fn invalid_translations() {
        let g = GridSpec::new(0.25, 1).unwrap();
        assert!(matches!(validate_zetas(&[vec![0.01], vec![0.01]], 2, &g), Err(Error::DuplicateZeta(1))));
        assert!(matches!(validate_zetas(&[vec![0.2]], 1, &g), Err(Error::ZetaOutOfRange(0))));
        assert!(ZetaScheme::Zero.resolve(2, &g).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = EstimatorSpec::new(EstimatorKind::ASEmp).with_m(4);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<EstimatorSpec>(&text).unwrap(), spec);
        let minimal: EstimatorSpec = serde_json::from_str(r#"{"kind":"AS1Emp"}"#).unwrap();
        assert_eq!(minimal, EstimatorSpec::new(EstimatorKind::AS1Emp));
    }

    #[test]
    fn resolve_schedules() {
        let r = EstimatorSpec::new(EstimatorKind::AS1Emp).resolve(256, 1, 2).unwrap();
        assert_eq!(r.sigma, Some(0.25));
        assert_eq!(r.grid.unwrap().g(), 4);
        let r = EstimatorSpec::new(EstimatorKind::SEmp).resolve(16, 1, 2).unwrap();
        assert_eq!(r.sigma, Some(0.5));
        assert_eq!(r.grid.unwrap().g(), 8);
        assert_eq!(r.surrogate, Some(256));
        assert!(EstimatorSpec::new(EstimatorKind::AEmp).with_m(3).resolve(16, 1, 2).is_err());
    }
}
