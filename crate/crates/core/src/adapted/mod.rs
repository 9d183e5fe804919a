//! Adapted distances between discrete path measures.
//!
//! [`aw1`] runs backward induction over pairs of prefix-tree nodes: the value
//! of a matched pair of prefixes is the optimal transport, between their
//! next-stage conditional laws, of the stage distance plus the value of the
//! matched children. [`av1`] does the same for the cost
//! `(|x| + |y| + 1) 1{x != y}`; once two prefixes differ that cost no longer
//! depends on the coupling, so only pairs of equal prefixes need a state.
//! [`bicausal_lp`] solves the same problems as one linear program and serves
//! as an independent check.

mod oracle;
mod random;

pub use oracle::{bicausal_lp, bicausal_lp_oracle, OracleCost, LP_PAIR_LIMIT};
pub use random::{random_pair, random_tree_measure};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::path_measure::{disintegrate, linear_moment_coefficient, stage_distance, DiscretePathMeasure, PrefixTree};
use crate::transport::{self, solve_ot, w1_line_sorted, Coupling, CostMatrix};

/// Slack allowed in every inequality check.
pub const CHECK_TOLERANCE: f64 = 1e-9;

/// Cost-to-go of every matched pair of prefix nodes.
#[derive(Clone, Debug)]
pub struct NestedValueTable {
    rows: Vec<usize>,
    cols: Vec<usize>,
    levels: Vec<Vec<f64>>,
    root: f64,
}

impl NestedValueTable {
    /// Number of stages `T`.
    pub fn horizon(&self) -> usize {
        self.levels.len() + 1
    }

    /// Value of the node pair `(i, j)` at level `t`; zero on the last level.
    pub fn value(&self, t: usize, i: usize, j: usize) -> f64 {
        match self.levels.get(t) {
            Some(v) => v[i * self.cols[t] + j],
            None => 0.0,
        }
    }

    /// Shape `(|mu nodes|, |nu nodes|)` of level `t`.
    pub fn shape(&self, t: usize) -> (usize, usize) {
        (self.rows[t], self.cols[t])
    }

    pub fn root(&self) -> f64 {
        self.root
    }
}

/// Conditional OT between children of `i` in `a` and children of `j` in `b`,
/// with cost `|x - y| + next(c, c')`.
fn child_value(
    a: &PrefixTree,
    b: &PrefixTree,
    t: usize,
    ci: std::ops::Range<usize>,
    cj: std::ops::Range<usize>,
    next: Option<&[f64]>,
    next_cols: usize,
) -> Result<f64> {
    let la = a.level(t);
    let lb = b.level(t);
    let wa = la.cond_weights_of(ci.clone());
    let wb = lb.cond_weights_of(cj.clone());
    if next.is_none() && a.d() == 1 {
        return Ok(w1_line_sorted(la.values_of(ci), wa, lb.values_of(cj), wb));
    }
    let mut cost = Vec::with_capacity(ci.len() * cj.len());
    for c in ci.clone() {
        for c2 in cj.clone() {
            let extra = next.map_or(0.0, |v| v[c * next_cols + c2]);
            cost.push(stage_distance(la.value(c), lb.value(c2)) + extra);
        }
    }
    transport::ot_value(&cost, wa, wb)
}

/// Backward induction for `AW1` on two prefix trees.
pub fn aw1_trees(a: &PrefixTree, b: &PrefixTree) -> Result<NestedValueTable> {
    if a.d() != b.d() || a.horizon() != b.horizon() {
        return Err(Error::ShapeMismatch {
            d_a: a.d(),
            t_a: a.horizon(),
            d_b: b.d(),
            t_b: b.horizon(),
        });
    }
    let horizon = a.horizon();
    let rows: Vec<usize> = a.levels().iter().map(|l| l.len()).collect();
    let cols: Vec<usize> = b.levels().iter().map(|l| l.len()).collect();
    let mut levels: Vec<Vec<f64>> = vec![Vec::new(); horizon - 1];
    for t in (0..horizon - 1).rev() {
        let next = levels.get(t + 1).map(Vec::as_slice);
        let next_cols = cols.get(t + 1).copied().unwrap_or(0);
        let (la, lb) = (a.level(t), b.level(t));
        let table: Vec<Vec<f64>> = (0..rows[t])
            .into_par_iter()
            .map(|i| {
                (0..cols[t])
                    .map(|j| child_value(a, b, t + 1, la.children(i), lb.children(j), next, next_cols))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        levels[t] = table.concat();
    }
    let root = child_value(a, b, 0, a.roots(), b.roots(), levels.first().map(Vec::as_slice), cols.first().copied().unwrap_or(0))?;
    Ok(NestedValueTable {
        rows,
        cols,
        levels,
        root,
    })
}

/// Adapted Wasserstein distance `AW1` and its value table.
pub fn aw1_with_table(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<(f64, NestedValueTable)> {
    mu.same_shape(nu)?;
    let table = aw1_trees(&disintegrate(mu), &disintegrate(nu))?;
    Ok((table.root(), table))
}

/// Adapted Wasserstein distance `AW1`.
pub fn aw1(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<f64> {
    Ok(aw1_with_table(mu, nu)?.0)
}

/// An optimal bicausal coupling for `AW1`, assembled forward from the value table.
pub fn aw1_coupling(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<(f64, Coupling)> {
    mu.same_shape(nu)?;
    let (a, b) = (disintegrate(mu), disintegrate(nu));
    let table = aw1_trees(&a, &b)?;
    let mut entries = Vec::new();
    let mut stack = vec![(0usize, None::<(usize, usize)>, 1.0)];
    while let Some((t, pair, mass)) = stack.pop() {
        let (ci, cj) = match pair {
            None => (a.roots(), b.roots()),
            Some((i, j)) => (a.level(t - 1).children(i), b.level(t - 1).children(j)),
        };
        let (la, lb) = (a.level(t), b.level(t));
        let c = CostMatrix::from_fn(ci.len(), cj.len(), |x, y| {
            let (p, q) = (ci.start + x, cj.start + y);
            stage_distance(la.value(p), lb.value(q)) + table.value(t, p, q)
        })?;
        let sol = solve_ot(&c, la.cond_weights_of(ci.clone()), lb.cond_weights_of(cj.clone()))?;
        for (x, y, w) in sol.coupling.entries {
            let (p, q) = (ci.start + x, cj.start + y);
            if t + 1 == a.horizon() {
                entries.push((la.atoms(p).start, lb.atoms(q).start, mass * w));
            } else {
                stack.push((t + 1, Some((p, q)), mass * w));
            }
        }
    }
    entries.sort_by_key(|e| (e.0, e.1));
    Ok((
        table.root(),
        Coupling {
            rows: mu.len(),
            cols: nu.len(),
            entries,
        },
    ))
}

/// For each node of `a` at each level, the node of `b` with the same prefix.
fn match_prefixes(a: &PrefixTree, b: &PrefixTree) -> Vec<Vec<Option<usize>>> {
    let mut out: Vec<Vec<Option<usize>>> = Vec::with_capacity(a.horizon());
    for t in 0..a.horizon() {
        let (la, lb) = (a.level(t), b.level(t));
        let m = (0..la.len())
            .map(|i| {
                let candidates = match t {
                    0 => b.roots(),
                    _ => match out[t - 1][la.parent(i)] {
                        Some(q) => b.level(t - 1).children(q),
                        None => 0..0,
                    },
                };
                candidates.into_iter().find(|&j| lb.value(j) == la.value(i))
            })
            .collect();
        out.push(m);
    }
    out
}

/// Weighted adapted total variation `AV1`.
pub fn av1(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<f64> {
    mu.same_shape(nu)?;
    let (a, b) = (disintegrate(mu), disintegrate(nu));
    let horizon = a.horizon();
    let matched = match_prefixes(&a, &b);

    // value of each matched node pair, indexed by the node of `a`
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); horizon];
    values[horizon - 1] = vec![0.0; a.level(horizon - 1).len()];
    let stage = |t: usize, ci: std::ops::Range<usize>, cj: std::ops::Range<usize>, next: &[f64]| -> Result<f64> {
        let (la, lb) = (a.level(t), b.level(t));
        let mut cost = Vec::with_capacity(ci.len() * cj.len());
        for c in ci.clone() {
            for c2 in cj.clone() {
                cost.push(if matched[t][c] == Some(c2) {
                    next[c]
                } else {
                    la.prefix_norm(c) + la.future(c) + lb.prefix_norm(c2) + lb.future(c2) + 1.0
                });
            }
        }
        transport::ot_value(&cost, la.cond_weights_of(ci), lb.cond_weights_of(cj))
    };
    for t in (0..horizon - 1).rev() {
        let la = a.level(t);
        let mut v = vec![f64::NAN; la.len()];
        for i in 0..la.len() {
            if let Some(j) = matched[t][i] {
                v[i] = stage(t + 1, la.children(i), b.level(t).children(j), &values[t + 1])?;
            }
        }
        values[t] = v;
    }
    stage(0, a.roots(), b.roots(), &values[0])
}

/// Terms of the chain `W1 <= AW1 <= AV1 <= ((3 + 4 alpha)^T - 1) TV1`.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub alpha: f64,
    pub constant: f64,
    pub w1: f64,
    pub tv1: f64,
    pub av1: f64,
    pub aw1: f64,
}

impl DominationReport {
    pub fn w1_below_aw1(&self) -> bool {
        self.w1 <= self.aw1 + CHECK_TOLERANCE
    }

    pub fn aw1_below_av1(&self) -> bool {
        self.aw1 <= self.av1 + CHECK_TOLERANCE
    }

    pub fn av1_below_bound(&self) -> bool {
        self.av1 <= self.constant * self.tv1 + CHECK_TOLERANCE
    }

    pub fn holds(&self) -> bool {
        self.w1_below_aw1() && self.aw1_below_av1() && self.av1_below_bound()
    }

    /// `AV1 / TV1`, infinite when only `TV1` vanishes.
    pub fn ratio(&self) -> f64 {
        if self.tv1 == 0.0 {
            if self.av1 == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.av1 / self.tv1
        }
    }
}

/// Larger of the two linear moment coefficients.
pub fn joint_alpha(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> f64 {
    linear_moment_coefficient(&disintegrate(mu)).max(linear_moment_coefficient(&disintegrate(nu)))
}

/// Domination constant `(3 + 4 alpha)^T - 1`.
pub fn domination_constant(alpha: f64, horizon: usize) -> f64 {
    (3.0 + 4.0 * alpha).powi(horizon as i32) - 1.0
}

pub fn domination_check(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<DominationReport> {
    mu.same_shape(nu)?;
    let alpha = joint_alpha(mu, nu);
    Ok(DominationReport {
        alpha,
        constant: domination_constant(alpha, mu.horizon()),
        w1: transport::w1(mu, nu)?,
        tv1: transport::tv1_closed_form(mu, nu)?,
        av1: av1(mu, nu)?,
        aw1: aw1(mu, nu)?,
    })
}

/// One step `AV1(mu_{1:t+1}, nu_{1:t+1}) <= (2 + 4 alpha) AV1(mu_{1:t}, nu_{1:t}) + TV1(mu, nu)`.
#[derive(Clone, Debug, Serialize)]
pub struct RecursionStep {
    pub t: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl RecursionStep {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + CHECK_TOLERANCE
    }
}

/// Evaluates every step of the `AV1` recursion over marginal horizons, with
/// `alpha` taken from the full measures.
pub fn av1_recursion_check(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<Vec<RecursionStep>> {
    mu.same_shape(nu)?;
    let alpha = joint_alpha(mu, nu);
    let tv1 = transport::tv1_closed_form(mu, nu)?;
    let mut prev = av1(&mu.marginal(1)?, &nu.marginal(1)?)?;
    let mut out = Vec::new();
    for t in 1..mu.horizon() {
        let next = av1(&mu.marginal(t + 1)?, &nu.marginal(t + 1)?)?;
        out.push(RecursionStep {
            t,
            lhs: next,
            rhs: (2.0 + 4.0 * alpha) * prev + tv1,
        });
        prev = next;
    }
    Ok(out)
}

/// `AW1(mu, uniform mixture of parts)` against the average of `AW1(mu, part)`.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Whether the parts share no prefix. Disjoint full paths are not enough:
    /// the coupling argument splits on which part a prefix `y_{1:t}` lies in.
    pub disjoint: bool,
}

impl ConvexityReport {
    /// The inequality is only guaranteed, and only asserted, for disjoint parts.
    pub fn holds(&self) -> Option<bool> {
        self.disjoint.then_some(self.lhs <= self.rhs + CHECK_TOLERANCE)
    }
}

pub fn mixture_convexity_check(mu: &DiscretePathMeasure, parts: &[DiscretePathMeasure]) -> Result<ConvexityReport> {
    if parts.is_empty() {
        return Err(Error::Empty);
    }
    let disjoint = parts
        .iter()
        .enumerate()
        .all(|(i, p)| parts[i + 1..].iter().all(|q| p.prefixes_disjoint(q)));
    let mixture = DiscretePathMeasure::uniform_mixture(parts)?;
    let lhs = aw1(mu, &mixture)?;
    let dists = parts.iter().map(|p| aw1(mu, p)).collect::<Result<Vec<_>>>()?;
    let rhs = dists.iter().sum::<f64>() / parts.len() as f64;
    Ok(ConvexityReport { lhs, rhs, disjoint })
}
