//! Bicausal transport as a single linear program.
//!
//! Variables are the joint masses `pi(x_i, y_j)` of all atom pairs. On top of
//! the two marginal constraints, causality in each direction says that given
//! the prefixes `(x_{1:t}, y_{1:t})` the next stage `x_{t+1}` still follows
//! `mu_{x_{1:t}}`:
//!
//! `pi(x_{1:t+1} = p, y_{1:t} = q) = mu(p | parent(p)) pi(x_{1:t} = parent(p), y_{1:t} = q)`,
//!
//! and symmetrically for `nu`. The LP is slow and is only meant as a witness
//! for the dynamic programs.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};
use crate::path_measure::{disintegrate, sum_distance, sum_norm, DiscretePathMeasure, PrefixTree};

/// Largest number of atom pairs accepted by the oracle.
pub const LP_PAIR_LIMIT: usize = 400;

/// Causality constraints of `a` against prefixes of `b`, as coefficient lists
/// over the pair index `i * cols + j` (`i` atom of `a`, `j` atom of `b`).
fn causal_rows(a: &PrefixTree, b: &PrefixTree, a_first: bool, cols: usize) -> Vec<Vec<(usize, f64)>> {
    let pair = |i: usize, j: usize| if a_first { i * cols + j } else { j * cols + i };
    let mut rows = Vec::new();
    for t in 1..a.horizon() {
        let (la, parents, lb) = (a.level(t), a.level(t - 1), b.level(t - 1));
        for pp in 0..parents.len() {
            let kids = parents.children(pp);
            // the last child's constraint is the sum of the others
            for p in kids.start..kids.end.saturating_sub(1) {
                let w = la.cond_weight(p);
                let inside = la.atoms(p);
                for q in 0..lb.len() {
                    let mut row = Vec::new();
                    for i in parents.atoms(pp) {
                        let coeff = if inside.contains(&i) { 1.0 - w } else { -w };
                        for j in lb.atoms(q) {
                            row.push((pair(i, j), coeff));
                        }
                    }
                    rows.push(row);
                }
            }
        }
    }
    rows
}

/// Minimizes `sum pi_ij cost(x_i, y_j)` over bicausal couplings.
pub fn bicausal_lp<F>(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure, cost: F) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    mu.same_shape(nu)?;
    let (n, m) = (mu.len(), nu.len());
    if n * m > LP_PAIR_LIMIT {
        return Err(Error::InstanceTooLarge {
            pairs: n * m,
            limit: LP_PAIR_LIMIT,
        });
    }
    let (a, b) = (disintegrate(mu), disintegrate(nu));
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut vars: Vec<Variable> = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let c = cost(mu.path(i), nu.path(j));
            if !c.is_finite() {
                return Err(Error::NonFinite { idx: i * m + j, value: c });
            }
            vars.push(problem.add_var(c, (0.0, f64::INFINITY)));
        }
    }
    for i in 0..n {
        let row: Vec<(Variable, f64)> = (0..m).map(|j| (vars[i * m + j], 1.0)).collect();
        problem.add_constraint(&row, ComparisonOp::Eq, mu.weight(i));
    }
    // the last column constraint follows from the others
    for j in 0..m - 1 {
        let col: Vec<(Variable, f64)> = (0..n).map(|i| (vars[i * m + j], 1.0)).collect();
        problem.add_constraint(&col, ComparisonOp::Eq, nu.weight(j));
    }
    for row in causal_rows(&a, &b, true, m).into_iter().chain(causal_rows(&b, &a, false, m)) {
        let row: Vec<(Variable, f64)> = row.into_iter().map(|(k, c)| (vars[k], c)).collect();
        problem.add_constraint(&row, ComparisonOp::Eq, 0.0);
    }
    let solution = problem
        .solve()
        .map_err(|e| Error::Lp(e.to_string()))?
        .into_solution()
        .map_err(|_| Error::Lp("solve interrupted".into()))?;
    Ok(solution.objective())
}

/// Which full-path cost the oracle should use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleCost {
    /// `|x - y|`, giving `AW1`.
    Distance,
    /// `(|x| + |y| + 1) 1{x != y}`, giving `AV1`.
    WeightedIndicator,
}

/// Bicausal LP value for one of the two standard costs.
pub fn bicausal_lp_oracle(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure, cost: OracleCost) -> Result<f64> {
    let d = mu.d();
    match cost {
        OracleCost::Distance => bicausal_lp(mu, nu, |x, y| sum_distance(x, y, d)),
        OracleCost::WeightedIndicator => bicausal_lp(mu, nu, |x, y| {
            if x == y {
                0.0
            } else {
                sum_norm(x, d) + sum_norm(y, d) + 1.0
            }
        }),
    }
}
