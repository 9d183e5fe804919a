//! Prefix-tree view of a discrete path measure.
//!
//! Level `t` (zero-based) holds one node per distinct prefix `x_{1:t+1}`.
//! Because canonical atoms are sorted lexicographically, every prefix class
//! is a contiguous run of atoms and the children of a node are a contiguous
//! run of nodes on the next level.

use std::ops::Range;

use super::{stage_norm, DiscretePathMeasure};
use crate::error::Result;

/// Nodes of one tree level, stored column-wise.
#[derive(Clone, Debug)]
pub struct TreeLevel {
    d: usize,
    values: Vec<f64>,
    parent: Vec<usize>,
    cond_weight: Vec<f64>,
    mass: Vec<f64>,
    children: Vec<Range<usize>>,
    atoms: Vec<Range<usize>>,
    prefix_norm: Vec<f64>,
    future: Vec<f64>,
}

impl TreeLevel {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Stage value `x_t` of node `i`.
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    /// Stage values of a contiguous node range, row-major.
    pub fn values_of(&self, r: Range<usize>) -> &[f64] {
        &self.values[r.start * self.d..r.end * self.d]
    }

    /// Conditional weights of a contiguous node range.
    pub fn cond_weights_of(&self, r: Range<usize>) -> &[f64] {
        &self.cond_weight[r]
    }

    /// Index of the parent node on the previous level (0 on the first level).
    pub fn parent(&self, i: usize) -> usize {
        self.parent[i]
    }

    /// Weight of node `i` conditional on its parent prefix.
    pub fn cond_weight(&self, i: usize) -> f64 {
        self.cond_weight[i]
    }

    /// Unconditional mass of the prefix ending at node `i`.
    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    /// Children on the next level; empty on the last level.
    pub fn children(&self, i: usize) -> Range<usize> {
        self.children[i].clone()
    }

    /// Atoms of the source measure extending this prefix.
    pub fn atoms(&self, i: usize) -> Range<usize> {
        self.atoms[i].clone()
    }

    /// Sum-norm of the prefix ending at node `i`.
    pub fn prefix_norm(&self, i: usize) -> f64 {
        self.prefix_norm[i]
    }

    /// Expected remaining sum-norm `sum_{s>t} E[|x_s| | x_{1:t}]` given the prefix.
    pub fn future(&self, i: usize) -> f64 {
        self.future[i]
    }
}

/// Disintegration of a discrete path measure into successive conditional laws.
#[derive(Clone, Debug)]
pub struct PrefixTree {
    d: usize,
    horizon: usize,
    levels: Vec<TreeLevel>,
    root_future: f64,
}

impl PrefixTree {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Level `t` in `0..T`, holding the nodes for stage `t + 1`.
    pub fn level(&self, t: usize) -> &TreeLevel {
        &self.levels[t]
    }

    pub fn levels(&self) -> &[TreeLevel] {
        &self.levels
    }

    /// Children of the virtual root: all first-stage nodes.
    pub fn roots(&self) -> Range<usize> {
        0..self.levels[0].len()
    }

    /// Expected total sum-norm, i.e. the first moment.
    pub fn root_future(&self) -> f64 {
        self.root_future
    }

    /// Rebuilds the measure by multiplying conditional weights down each branch.
    pub fn flatten(&self) -> Result<DiscretePathMeasure> {
        let mut atoms = Vec::new();
        let mut path = Vec::with_capacity(self.d * self.horizon);
        for r in self.roots() {
            self.collect(0, r, 1.0, &mut path, &mut atoms);
        }
        let d = self.d;
        let horizon = self.horizon;
        let coords: Vec<f64> = atoms.iter().flat_map(|(p, _): &(Vec<f64>, f64)| p.iter().copied()).collect();
        let weights = atoms.into_iter().map(|(_, w)| w).collect();
        DiscretePathMeasure::from_flat(d, horizon, coords, weights)
    }

    fn collect(&self, t: usize, i: usize, w: f64, path: &mut Vec<f64>, out: &mut Vec<(Vec<f64>, f64)>) {
        let level = &self.levels[t];
        let w = w * level.cond_weight(i);
        path.extend_from_slice(level.value(i));
        if t + 1 == self.horizon {
            out.push((path.clone(), w));
        } else {
            for c in level.children(i) {
                self.collect(t + 1, c, w, path, out);
            }
        }
        path.truncate(path.len() - self.d);
    }
}

/// Groups the atoms of `m` by prefix at every stage.
pub fn disintegrate(m: &DiscretePathMeasure) -> PrefixTree {
    let d = m.d();
    let horizon = m.horizon();
    let n = m.len();
    let mut levels: Vec<TreeLevel> = Vec::with_capacity(horizon);

    for t in 0..horizon {
        let lo_c = t * d;
        let hi_c = (t + 1) * d;
        let prefix = |i: usize| &m.path(i)[..hi_c];
        let mut level = TreeLevel {
            d,
            values: Vec::new(),
            parent: Vec::new(),
            cond_weight: Vec::new(),
            mass: Vec::new(),
            children: Vec::new(),
            atoms: Vec::new(),
            prefix_norm: Vec::new(),
            future: Vec::new(),
        };
        let mut start = 0;
        let mut parent_cursor = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && prefix(end) == prefix(start) {
                end += 1;
            }
            let value = &m.path(start)[lo_c..hi_c];
            let mass: f64 = m.weights()[start..end].iter().sum();
            let (parent, parent_norm) = match levels.last() {
                Some(prev) => {
                    while !prev.atoms[parent_cursor].contains(&start) {
                        parent_cursor += 1;
                    }
                    (parent_cursor, prev.prefix_norm[parent_cursor])
                }
                None => (0, 0.0),
            };
            level.values.extend_from_slice(value);
            level.parent.push(parent);
            level.mass.push(mass);
            level.atoms.push(start..end);
            level.prefix_norm.push(parent_norm + stage_norm(value));
            level.children.push(0..0);
            start = end;
        }
        levels.push(level);
    }

    for t in 0..horizon - 1 {
        let (before, after) = levels.split_at_mut(t + 1);
        let level = &mut before[t];
        let next = &after[0];
        let mut c = 0;
        for i in 0..level.len() {
            let s = c;
            while c < next.len() && next.parent[c] == i {
                c += 1;
            }
            level.children[i] = s..c;
        }
    }
    let total: f64 = levels[0].mass.iter().sum();
    levels[0].cond_weight = levels[0].mass.iter().map(|w| w / total).collect();
    for t in 1..horizon {
        let (before, after) = levels.split_at_mut(t);
        let prev = &before[t - 1];
        let level = &mut after[0];
        let mut cond = vec![0.0; level.len()];
        for p in 0..prev.len() {
            let kids = prev.children(p);
            let total: f64 = level.mass[kids.clone()].iter().sum();
            for c in kids {
                cond[c] = level.mass[c] / total;
            }
        }
        level.cond_weight = cond;
    }

    // expected future norms, one backward pass
    levels[horizon - 1].future = vec![0.0; levels[horizon - 1].len()];
    for t in (0..horizon - 1).rev() {
        let (before, after) = levels.split_at_mut(t + 1);
        let level = &mut before[t];
        let next = &after[0];
        level.future = (0..level.len())
            .map(|i| {
                level
                    .children(i)
                    .map(|c| next.cond_weight[c] * (stage_norm(next.value(c)) + next.future[c]))
                    .sum()
            })
            .collect();
    }
    let first = &levels[0];
    let root_future = (0..first.len())
        .map(|i| first.cond_weight[i] * (stage_norm(first.value(i)) + first.future[i]))
        .sum();

    PrefixTree {
        d,
        horizon,
        levels,
        root_future,
    }
}

/// Smallest `alpha` with `E[|x_{t+1}| | x_{1:t}] <= alpha (|x_{1:t}| + 1)` over
/// all prefixes of length `1..T-1`; zero when `T = 1`.
pub fn linear_moment_coefficient(tree: &PrefixTree) -> f64 {
    let mut alpha: f64 = 0.0;
    for t in 0..tree.horizon() - 1 {
        let level = tree.level(t);
        let next = tree.level(t + 1);
        for i in 0..level.len() {
            let mean: f64 = level
                .children(i)
                .map(|c| next.cond_weight(c) * stage_norm(next.value(c)))
                .sum();
            alpha = alpha.max(mean / (level.prefix_norm(i) + 1.0));
        }
    }
    alpha
}
