//! Transportation simplex on a spanning-tree basis.
//!
//! Rows are tree nodes `0..n`, columns are nodes `n..n+m`. The basis always
//! holds exactly `n + m - 1` cells forming a spanning tree; degenerate cells
//! carry zero flow. Entering cells are chosen by most negative reduced cost;
//! after a run of degenerate pivots the rule switches to the first improving
//! cell in row-major order, which rules out cycling.

use crate::error::{Error, Result};

const DEGENERATE_SWITCH: usize = 50;

/// Optimal basic solution with its dual potentials.
#[derive(Clone, Debug)]
pub struct SimplexSolution {
    pub value: f64,
    /// Basic cells `(row, col, flow)`, zero flows included.
    pub basis: Vec<(usize, usize, f64)>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

struct Tree {
    n: usize,
    adj: Vec<Vec<(usize, usize)>>,
}

impl Tree {
    fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            adj: vec![Vec::new(); n + m],
        }
    }

    fn link(&mut self, i: usize, j: usize, cell: usize) {
        let c = self.n + j;
        self.adj[i].push((c, cell));
        self.adj[c].push((i, cell));
    }

    fn unlink(&mut self, i: usize, j: usize, cell: usize) {
        let c = self.n + j;
        self.adj[i].retain(|&(_, k)| k != cell);
        self.adj[c].retain(|&(_, k)| k != cell);
    }

    /// Cells on the tree path from node `from` to node `to`, in order.
    fn path(&self, from: usize, to: usize, pred: &mut [(usize, usize)], stack: &mut Vec<usize>) -> Vec<usize> {
        const NONE: usize = usize::MAX;
        pred.fill((NONE, NONE));
        pred[from] = (from, NONE);
        stack.clear();
        stack.push(from);
        while let Some(x) = stack.pop() {
            if x == to {
                break;
            }
            for &(y, cell) in &self.adj[x] {
                if pred[y].0 == NONE {
                    pred[y] = (x, cell);
                    stack.push(y);
                }
            }
        }
        let mut cells = Vec::new();
        let mut x = to;
        while x != from {
            let (p, cell) = pred[x];
            cells.push(cell);
            x = p;
        }
        cells.reverse();
        cells
    }

    fn potentials(&self, cost: &[f64], m: usize, cells: &[(usize, usize, f64)], u: &mut [f64], v: &mut [f64], stack: &mut Vec<usize>, seen: &mut [bool]) {
        seen.fill(false);
        u[0] = 0.0;
        seen[0] = true;
        stack.clear();
        stack.push(0);
        while let Some(x) = stack.pop() {
            for &(y, cell) in &self.adj[x] {
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                let (i, j, _) = cells[cell];
                let c = cost[i * m + j];
                if x < self.n {
                    v[j] = c - u[i];
                } else {
                    u[i] = c - v[j];
                }
                stack.push(y);
            }
        }
    }
}

/// Minimizes `sum c_ij pi_ij` over couplings of `a` and `b`.
///
/// `cost` is row-major `n x m`. Masses must be non-negative with equal totals.
pub fn solve(cost: &[f64], a: &[f64], b: &[f64]) -> Result<SimplexSolution> {
    let n = a.len();
    let m = b.len();
    if n == 0 || m == 0 {
        return Err(Error::Empty);
    }
    if cost.len() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: cost.len(),
        });
    }

    // northwest corner start
    let mut cells: Vec<(usize, usize, f64)> = Vec::with_capacity(n + m - 1);
    let mut tree = Tree::new(n, m);
    {
        let mut ra = a[0];
        let mut rb = b[0];
        let (mut i, mut j) = (0, 0);
        loop {
            let x = ra.min(rb).max(0.0);
            tree.link(i, j, cells.len());
            cells.push((i, j, x));
            ra -= x;
            rb -= x;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if j == m - 1 || (i < n - 1 && ra <= rb) {
                i += 1;
                ra = a[i];
            } else {
                j += 1;
                rb = b[j];
            }
        }
    }
    // the last cell absorbs rounding drift; flows stay non-negative
    if let Some(last) = cells.last_mut() {
        last.2 = last.2.max(0.0);
    }

    let scale = cost.iter().fold(0.0f64, |s, c| s.max(c.abs())) + 1.0;
    let tol = 1e-12 * scale;
    let max_pivots = 100 * (n + m) * (n + m) + 10_000;

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut pred = vec![(0, 0); n + m];
    let mut stack = Vec::new();
    let mut seen = vec![false; n + m];
    let mut pivots = 0;
    let mut degenerate_run = 0;

    loop {
        tree.potentials(cost, m, &cells, &mut u, &mut v, &mut stack, &mut seen);

        let entering = if degenerate_run < DEGENERATE_SWITCH {
            let mut best = (-tol, None);
            for i in 0..n {
                let row = &cost[i * m..(i + 1) * m];
                for j in 0..m {
                    let r = row[j] - u[i] - v[j];
                    if r < best.0 {
                        best = (r, Some((i, j)));
                    }
                }
            }
            best.1
        } else {
            (0..n * m)
                .find(|&k| cost[k] - u[k / m] - v[k % m] < -tol)
                .map(|k| (k / m, k % m))
        };
        let Some((ei, ej)) = entering else { break };

        if pivots >= max_pivots {
            return Err(Error::NoConvergence(pivots));
        }
        pivots += 1;

        // cycle: entering cell (+), then the tree path from column ej back to row ei
        let path = tree.path(n + ej, ei, &mut pred, &mut stack);
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = cells[cell].2;
                if f < theta || (f == theta && cell < leave) {
                    theta = f;
                    leave = cell;
                }
            }
        }
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                cells[cell].2 = (cells[cell].2 - theta).max(0.0);
            } else {
                cells[cell].2 += theta;
            }
        }
        degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };

        let (li, lj, _) = cells[leave];
        tree.unlink(li, lj, leave);
        cells[leave] = (ei, ej, theta);
        tree.link(ei, ej, leave);
    }

    let terms: Vec<f64> = cells.iter().map(|&(i, j, f)| f * cost[i * m + j]).collect();
    Ok(SimplexSolution {
        value: crate::path_measure::pairwise_sum(&terms),
        basis: cells,
        u,
        v,
        pivots,
    })
}
