//! Exact discrete optimal transport and the non-adapted distances `W1`,
//! `TV` and `TV1`.

mod one_dim;
mod simplex;

pub use one_dim::{w1_line, w1_line_sorted};
pub use simplex::SimplexSolution;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path_measure::{pairwise_sum, sum_distance, sum_norm, DiscretePathMeasure};

/// Tolerance for marginal and mass checks.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// Dense non-negative `rows x cols` cost matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        for (idx, &c) in data.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidParameter(format!("cost entry {idx} is {c}")));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Sparse coupling between a source with `rows` atoms and a target with `cols` atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub rows: usize,
    pub cols: usize,
    /// Non-zero entries `(i, j, mass)`.
    pub entries: Vec<(usize, usize, f64)>,
}

impl Coupling {
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for &(i, j, w) in &self.entries {
            out[i * self.cols + j] += w;
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for &(i, _, w) in &self.entries {
            out[i] += w;
        }
        out
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for &(_, j, w) in &self.entries {
            out[j] += w;
        }
        out
    }

    pub fn cost(&self, c: &CostMatrix) -> f64 {
        let terms: Vec<f64> = self.entries.iter().map(|&(i, j, w)| w * c.get(i, j)).collect();
        pairwise_sum(&terms)
    }

    /// True when both marginals match within `tol` and every entry is non-negative.
    pub fn has_marginals(&self, a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == self.rows
            && b.len() == self.cols
            && self.entries.iter().all(|e| e.2 >= 0.0)
            && self.row_sums().iter().zip(a).all(|(x, y)| (x - y).abs() <= tol)
            && self.col_sums().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }
}

/// Optimal transport value, an optimal coupling and optimal dual potentials.
#[derive(Clone, Debug)]
pub struct OtSolution {
    pub value: f64,
    pub coupling: Coupling,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl OtSolution {
    pub fn dual_value(&self, a: &[f64], b: &[f64]) -> f64 {
        let terms: Vec<f64> = a
            .iter()
            .zip(&self.u)
            .chain(b.iter().zip(&self.v))
            .map(|(w, p)| w * p)
            .collect();
        pairwise_sum(&terms)
    }
}

fn check_weights(w: &[f64]) -> Result<f64> {
    for (idx, &x) in w.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidWeight { idx, value: x });
        }
    }
    Ok(w.iter().sum())
}

/// Exact discrete OT for the cost `c` between weights `a` and `b`.
pub fn solve_ot(c: &CostMatrix, a: &[f64], b: &[f64]) -> Result<OtSolution> {
    if a.len() != c.rows() || b.len() != c.cols() {
        return Err(Error::DimensionMismatch {
            expected: c.rows() * c.cols(),
            got: a.len() * b.len(),
        });
    }
    let sa = check_weights(a)?;
    let sb = check_weights(b)?;
    if (sa - sb).abs() > MARGINAL_TOLERANCE * sa.max(1.0) {
        return Err(Error::NotNormalized { sum: sb / sa });
    }
    let s = simplex::solve(c.data(), a, b)?;
    let entries = s.basis.iter().copied().filter(|e| e.2 > 0.0).collect();
    Ok(OtSolution {
        value: s.value,
        coupling: Coupling {
            rows: c.rows(),
            cols: c.cols(),
            entries,
        },
        u: s.u,
        v: s.v,
    })
}

/// OT value only, for internal callers with validated inputs.
pub(crate) fn ot_value(cost: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    match (a.len(), b.len()) {
        (1, _) => Ok(pairwise_sum(&cost.iter().zip(b).map(|(c, w)| c * w).collect::<Vec<_>>())),
        (_, 1) => Ok(pairwise_sum(&cost.iter().zip(a).map(|(c, w)| c * w).collect::<Vec<_>>())),
        _ => Ok(simplex::solve(cost, a, b)?.value),
    }
}

/// Sum-norm cost matrix between the atoms of two measures.
pub fn distance_matrix(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> CostMatrix {
    let d = mu.d();
    CostMatrix::from_fn(mu.len(), nu.len(), |i, j| sum_distance(mu.path(i), nu.path(j), d))
        .expect("distances are finite and non-negative")
}

/// `W1` with the sum-norm ground cost, together with an optimal coupling.
pub fn w1_with_coupling(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<OtSolution> {
    mu.same_shape(nu)?;
    solve_ot(&distance_matrix(mu, nu), mu.weights(), nu.weights())
}

/// First order Wasserstein distance with the sum-norm ground cost.
pub fn w1(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<f64> {
    mu.same_shape(nu)?;
    if mu.dim() == 1 {
        return Ok(w1_line_sorted(mu.coords(), mu.weights(), nu.coords(), nu.weights()));
    }
    Ok(w1_with_coupling(mu, nu)?.value)
}

/// Atom weights of both measures over their union support, in canonical order.
pub fn union_support(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Vec<(Vec<f64>, f64, f64)> {
    let mut out = Vec::with_capacity(mu.len() + nu.len());
    let (mut i, mut j) = (0, 0);
    while i < mu.len() || j < nu.len() {
        let ord = if i == mu.len() {
            std::cmp::Ordering::Greater
        } else if j == nu.len() {
            std::cmp::Ordering::Less
        } else {
            crate::path_measure::lex_cmp(mu.path(i), nu.path(j))
        };
        match ord {
            std::cmp::Ordering::Less => {
                out.push((mu.path(i).to_vec(), mu.weight(i), 0.0));
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((nu.path(j).to_vec(), 0.0, nu.weight(j)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((mu.path(i).to_vec(), mu.weight(i), nu.weight(j)));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Total variation `sup_A |mu(A) - nu(A)|`, half the `L1` distance of the weights.
pub fn tv(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<f64> {
    mu.same_shape(nu)?;
    let terms: Vec<f64> = union_support(mu, nu).iter().map(|(_, a, b)| (a - b).abs()).collect();
    Ok(0.5 * pairwise_sum(&terms))
}

/// `TV` as the optimal transport value for the cost `1{x != y}`.
pub fn tv_coupling_form(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<f64> {
    mu.same_shape(nu)?;
    let c = CostMatrix::from_fn(mu.len(), nu.len(), |i, j| if mu.path(i) == nu.path(j) { 0.0 } else { 1.0 })?;
    Ok(solve_ot(&c, mu.weights(), nu.weights())?.value)
}

/// `TV1 = sum_x (|x| + 1/2) |mu(x) - nu(x)|` over the union support.
pub fn tv1_closed_form(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<f64> {
    mu.same_shape(nu)?;
    let d = mu.d();
    let terms: Vec<f64> = union_support(mu, nu)
        .iter()
        .map(|(x, a, b)| (sum_norm(x, d) + 0.5) * (a - b).abs())
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Cost matrix `(|x| + |y| + 1) 1{x != y}`.
pub fn tv1_cost_matrix(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> CostMatrix {
    let d = mu.d();
    CostMatrix::from_fn(mu.len(), nu.len(), |i, j| {
        let (x, y) = (mu.path(i), nu.path(j));
        if x == y {
            0.0
        } else {
            sum_norm(x, d) + sum_norm(y, d) + 1.0
        }
    })
    .expect("norms are finite")
}

/// `TV1` as the optimal transport value for the cost `(|x| + |y| + 1) 1{x != y}`.
pub fn tv1_coupling_form(mu: &DiscretePathMeasure, nu: &DiscretePathMeasure) -> Result<f64> {
    mu.same_shape(nu)?;
    Ok(solve_ot(&tv1_cost_matrix(mu, nu), mu.weights(), nu.weights())?.value)
}
