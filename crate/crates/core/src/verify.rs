//! Two-period measures with closed-form distances, and a suite that checks
//! the computed values against the stated ones.
//!
//! - split pair: `mu = 1/2 d(0,1) + 1/2 d(0,-1)`, `nu = 1/2 d(e,1) + 1/2 d(-e,-1)`;
//!   `W1 = e`, `AW1 = 1 + e`.
//! - heavy conditional: `mu = e(1-e) d(1,1/e) + e^2 d(1,0) + (1-e) d(0,0)`,
//!   `nu = e(1-e) d(1,1/e) + (1-e+e^2) d(0,0)`; stated `TV1 = 2e^2` and
//!   `AV1 = 2 + e - e^2`.
//! - crossed mixture: `mu = nu1 = 1/2 d(e,1) + 1/2 d(-e,-1)`,
//!   `nu2 = 1/2 d(-e,1) + 1/2 d(e,-1)`, `nu = (nu1 + nu2)/2`; `AW1` values
//!   `0`, `2e`, `1`, so `AW1(mu, nu)` exceeds the average `e`.

use serde::Serialize;

use crate::adapted::{
    av1, av1_recursion_check, aw1, bicausal_lp_oracle, domination_check, mixture_convexity_check, random_pair,
    random_tree_measure, OracleCost,
};
use crate::error::{Error, Result};
use crate::estimators::zeta_default;
use crate::gaussian::{stream_id, SeededSampler};
use crate::path_measure::{adapted_project, shift, DiscretePathMeasure, GridSpec};
use crate::transport::{tv1_closed_form, tv1_coupling_form, w1};

pub const EXAMPLE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleCheck {
    pub name: String,
    pub eps: f64,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ExampleCheck {
    fn new(name: &str, eps: f64, expected: f64, computed: f64) -> Self {
        Self {
            name: name.to_string(),
            eps,
            expected,
            computed,
            tolerance: EXAMPLE_TOLERANCE,
            passed: (expected - computed).abs() <= EXAMPLE_TOLERANCE,
        }
    }
}

fn two_period(atoms: &[([f64; 2], f64)]) -> Result<DiscretePathMeasure> {
    DiscretePathMeasure::new(1, 2, atoms.iter().map(|(p, w)| (p.to_vec(), *w)).collect())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")))
    }
}

pub fn split_pair(eps: f64) -> Result<(DiscretePathMeasure, DiscretePathMeasure)> {
    check_eps(eps)?;
    Ok((
        two_period(&[([0.0, 1.0], 0.5), ([0.0, -1.0], 0.5)])?,
        two_period(&[([eps, 1.0], 0.5), ([-eps, -1.0], 0.5)])?,
    ))
}

pub fn heavy_conditional(eps: f64) -> Result<(DiscretePathMeasure, DiscretePathMeasure)> {
    check_eps(eps)?;
    let heavy = eps * (1.0 - eps);
    Ok((
        two_period(&[([1.0, 1.0 / eps], heavy), ([1.0, 0.0], eps * eps), ([0.0, 0.0], 1.0 - eps)])?,
        two_period(&[([1.0, 1.0 / eps], heavy), ([0.0, 0.0], 1.0 - eps + eps * eps)])?,
    ))
}

/// `(mu, nu1, nu2)`; the mixture is `(nu1 + nu2) / 2`.
pub fn crossed_mixture(eps: f64) -> Result<(DiscretePathMeasure, DiscretePathMeasure, DiscretePathMeasure)> {
    check_eps(eps)?;
    let mu = two_period(&[([eps, 1.0], 0.5), ([-eps, -1.0], 0.5)])?;
    let nu2 = two_period(&[([-eps, 1.0], 0.5), ([eps, -1.0], 0.5)])?;
    Ok((mu.clone(), mu, nu2))
}

pub fn split_pair_checks(eps: f64) -> Result<Vec<ExampleCheck>> {
    let (mu, nu) = split_pair(eps)?;
    Ok(vec![
        ExampleCheck::new("split-pair W1", eps, eps, w1(&mu, &nu)?),
        ExampleCheck::new("split-pair AW1", eps, 1.0 + eps, aw1(&mu, &nu)?),
    ])
}

pub fn heavy_conditional_checks(eps: f64) -> Result<Vec<ExampleCheck>> {
    let (mu, nu) = heavy_conditional(eps)?;
    Ok(vec![
        ExampleCheck::new("heavy-conditional TV1", eps, 2.0 * eps * eps, tv1_closed_form(&mu, &nu)?),
        ExampleCheck::new("heavy-conditional AV1", eps, 2.0 + eps - eps * eps, av1(&mu, &nu)?),
    ])
}

pub fn crossed_mixture_checks(eps: f64) -> Result<Vec<ExampleCheck>> {
    let (mu, nu1, nu2) = crossed_mixture(eps)?;
    let nu = DiscretePathMeasure::uniform_mixture(&[nu1.clone(), nu2.clone()])?;
    let (a1, a2, a) = (aw1(&mu, &nu1)?, aw1(&mu, &nu2)?, aw1(&mu, &nu)?);
    Ok(vec![
        ExampleCheck::new("crossed-mixture AW1 to first part", eps, 0.0, a1),
        ExampleCheck::new("crossed-mixture AW1 to second part", eps, 2.0 * eps, a2),
        ExampleCheck::new("crossed-mixture AW1 to mixture", eps, 1.0, a),
        // positive gap: the mixture is farther than the average of its parts
        ExampleCheck::new("crossed-mixture convexity gap", eps, 1.0 - eps, a - (a1 + a2) / 2.0),
    ])
}

/// All checks for every `eps`. `offset` is added to every expected value and
/// exists only to exercise the failure path.
pub fn example_suite(eps_values: &[f64], offset: f64) -> Result<Vec<ExampleCheck>> {
    let mut out = Vec::new();
    for &eps in eps_values {
        out.extend(split_pair_checks(eps)?);
        out.extend(heavy_conditional_checks(eps)?);
        out.extend(crossed_mixture_checks(eps)?);
    }
    if offset != 0.0 {
        for c in out.iter_mut() {
            *c = ExampleCheck::new(&c.name, c.eps, c.expected + offset, c.computed);
        }
    }
    Ok(out)
}

/// Largest gap allowed between the dynamic programs and the LP.
pub const ORACLE_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSweep {
    pub instances: usize,
    pub max_aw1_gap: f64,
    pub max_av1_gap: f64,
    pub passed: bool,
}

/// Dynamic programs against the bicausal LP on `count` random two-stage pairs
/// on the line with at most four children per node.
pub fn oracle_sweep(seed: u64, count: usize) -> Result<OracleSweep> {
    let (mut gw, mut gv): (f64, f64) = (0.0, 0.0);
    for i in 0..count {
        let (mu, nu) = random_pair(seed, i as u64, 1, 2, 4)?;
        gw = gw.max((aw1(&mu, &nu)? - bicausal_lp_oracle(&mu, &nu, OracleCost::Distance)?).abs());
        gv = gv.max((av1(&mu, &nu)? - bicausal_lp_oracle(&mu, &nu, OracleCost::WeightedIndicator)?).abs());
    }
    Ok(OracleSweep {
        instances: count,
        max_aw1_gap: gw,
        max_av1_gap: gv,
        passed: gw <= ORACLE_TOLERANCE && gv <= ORACLE_TOLERANCE,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalitySweep {
    pub pairs: usize,
    /// Pairs breaking `W1 <= AW1 <= AV1 <= ((3 + 4 alpha)^T - 1) TV1`.
    pub domination_violations: Vec<usize>,
    /// Pairs where the two `TV1` formulas differ by more than the tolerance.
    pub tv1_form_violations: Vec<usize>,
    /// Pairs with a failing step of the `AV1` recursion.
    pub recursion_violations: Vec<usize>,
    pub max_tv1_form_gap: f64,
    pub passed: bool,
}

/// Shapes cycled through by the inequality sweep, as `(d, T, max children)`.
const SWEEP_SHAPES: [(usize, usize, usize); 3] = [(1, 2, 4), (1, 3, 3), (2, 2, 3)];

/// Metric-domination chain, `TV1` closed form against its coupling form, and
/// the `AV1` recursion on `count` random pairs.
pub fn inequality_sweep(seed: u64, count: usize) -> Result<InequalitySweep> {
    let mut out = InequalitySweep {
        pairs: count,
        domination_violations: Vec::new(),
        tv1_form_violations: Vec::new(),
        recursion_violations: Vec::new(),
        max_tv1_form_gap: 0.0,
        passed: false,
    };
    for i in 0..count {
        let (d, horizon, branch) = SWEEP_SHAPES[i % SWEEP_SHAPES.len()];
        let (mu, nu) = random_pair(seed, i as u64, d, horizon, branch)?;
        if !domination_check(&mu, &nu)?.holds() {
            out.domination_violations.push(i);
        }
        let gap = (tv1_closed_form(&mu, &nu)? - tv1_coupling_form(&mu, &nu)?).abs();
        out.max_tv1_form_gap = out.max_tv1_form_gap.max(gap);
        if gap > EXAMPLE_TOLERANCE {
            out.tv1_form_violations.push(i);
        }
        if !av1_recursion_check(&mu, &nu)?.iter().all(|s| s.holds()) {
            out.recursion_violations.push(i);
        }
    }
    out.passed = out.domination_violations.is_empty()
        && out.tv1_form_violations.is_empty()
        && out.recursion_violations.is_empty();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexitySweep {
    pub constructions: usize,
    pub violations: Vec<usize>,
    /// Constructions whose parts unexpectedly share a prefix.
    pub overlapping: Vec<usize>,
    /// Largest `AW1(mu, mixture) - average AW1(mu, part)`.
    pub max_excess: f64,
    pub passed: bool,
}

/// Mixtures of `M in 2..=4` random measures, each projected on a grid and
/// translated by its own `zeta^m`, against a random `mu`.
pub fn convexity_sweep(seed: u64, count: usize) -> Result<ConvexitySweep> {
    let mut out = ConvexitySweep {
        constructions: count,
        violations: Vec::new(),
        overlapping: Vec::new(),
        max_excess: f64::NEG_INFINITY,
        passed: false,
    };
    let grid = GridSpec::new(0.25, 2)?;
    for i in 0..count {
        let mut s = SeededSampler::new(seed, stream_id(&[0xC0, i as u64]));
        let m = 2 + i % 3;
        let mu = random_tree_measure(&mut s, 1, 2, 3)?;
        let zetas = zeta_default(m, &grid);
        let parts = zetas
            .iter()
            .map(|z| shift(&adapted_project(&grid, &random_tree_measure(&mut s, 1, 2, 3)?)?, z))
            .collect::<Result<Vec<_>>>()?;
        let report = mixture_convexity_check(&mu, &parts)?;
        out.max_excess = out.max_excess.max(report.lhs - report.rhs);
        match report.holds() {
            Some(true) => {}
            Some(false) => out.violations.push(i),
            None => out.overlapping.push(i),
        }
    }
    out.passed = out.violations.is_empty() && out.overlapping.is_empty();
    Ok(out)
}
