//! Seeded random tree-structured measures for cross-checks.

use crate::error::Result;
use crate::gaussian::SeededSampler;
use crate::path_measure::DiscretePathMeasure;

/// Stage values are drawn from this set in every coordinate, so that two
/// independent draws share atoms and prefixes often.
const VALUES: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Random measure whose every node has between 1 and `max_branch` children
/// with distinct stage values and random positive conditional weights.
pub fn random_tree_measure(s: &mut SeededSampler, d: usize, horizon: usize, max_branch: usize) -> Result<DiscretePathMeasure> {
    let mut atoms = Vec::new();
    grow(s, d, horizon, max_branch.max(1), &mut Vec::new(), 1.0, &mut atoms);
    DiscretePathMeasure::new(d, horizon, atoms)
}

fn grow(s: &mut SeededSampler, d: usize, horizon: usize, max_branch: usize, prefix: &mut Vec<f64>, mass: f64, out: &mut Vec<(Vec<f64>, f64)>) {
    if prefix.len() == d * horizon {
        out.push((prefix.clone(), mass));
        return;
    }
    let cells = VALUES.len().pow(d as u32);
    let k = 1 + s.index(max_branch.min(cells));
    // distinct stage values by partial Fisher-Yates over the value lattice
    let mut pool: Vec<usize> = (0..cells).collect();
    let mut raw = Vec::with_capacity(k);
    for c in 0..k {
        let pick = c + s.index(cells - c);
        pool.swap(c, pick);
        raw.push(0.1 + s.uniform());
    }
    let total: f64 = raw.iter().sum();
    for c in 0..k {
        let mut code = pool[c];
        for _ in 0..d {
            prefix.push(VALUES[code % VALUES.len()]);
            code /= VALUES.len();
        }
        grow(s, d, horizon, max_branch, prefix, mass * raw[c] / total, out);
        prefix.truncate(prefix.len() - d);
    }
}

/// Two independent random measures of the same shape.
pub fn random_pair(seed: u64, index: u64, d: usize, horizon: usize, max_branch: usize) -> Result<(DiscretePathMeasure, DiscretePathMeasure)> {
    let mut s = SeededSampler::new(seed, crate::gaussian::stream_id(&[0xA7, index]));
    let mu = random_tree_measure(&mut s, d, horizon, max_branch)?;
    let nu = random_tree_measure(&mut s, d, horizon, max_branch)?;
    Ok((mu, nu))
}
