use adapted_ot::path_measure::{
    adapted_project, disintegrate, linear_moment_coefficient, moment, shift, stage_norm, sum_norm, truncate,
    DiscretePathMeasure, GridSpec,
};
use proptest::prelude::*;

/// Random measure with values on a coarse lattice so prefixes repeat.
fn measure_strategy(max_d: usize, max_t: usize, max_atoms: usize) -> impl Strategy<Value = DiscretePathMeasure> {
    (1..=max_d, 1..=max_t).prop_flat_map(move |(d, t)| {
        prop::collection::vec((prop::collection::vec(-4i32..=4, d * t), 1u32..=20), 1..=max_atoms).prop_map(
            move |atoms| {
                let total: f64 = atoms.iter().map(|(_, w)| *w as f64).sum();
                let atoms = atoms
                    .into_iter()
                    .map(|(p, w)| (p.into_iter().map(|v| v as f64 * 0.5).collect(), w as f64 / total))
                    .collect();
                DiscretePathMeasure::new(d, t, atoms).unwrap()
            },
        )
    })
}

/// Random measure with unconstrained real coordinates.
fn real_measure(d: usize, t: usize) -> impl Strategy<Value = DiscretePathMeasure> {
    prop::collection::vec((prop::collection::vec(-20.0f64..20.0, d * t), 0.05f64..1.0), 1..8).prop_map(move |atoms| {
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        DiscretePathMeasure::new(d, t, atoms.into_iter().map(|(p, w)| (p, w / total)).collect()).unwrap()
    })
}

/// `E[sum_{s > t} |x_s| | x_{1:t} = prefix]` by direct summation over atoms.
fn brute_future(m: &DiscretePathMeasure, prefix: &[f64]) -> f64 {
    let d = m.d();
    let (mut num, mut den) = (0.0, 0.0);
    for (p, w) in m.atoms() {
        if &p[..prefix.len()] == prefix {
            num += w * sum_norm(&p[prefix.len()..], d);
            den += w;
        }
    }
    num / den
}

proptest! {
    #[test]
    fn flatten_inverts_disintegrate(m in measure_strategy(2, 3, 10)) {
        let back = disintegrate(&m).flatten().unwrap();
        prop_assert_eq!(back.len(), m.len());
        for i in 0..m.len() {
            prop_assert_eq!(back.path(i), m.path(i));
            prop_assert!((back.weight(i) - m.weight(i)).abs() <= 1e-12);
        }
    }

    #[test]
    fn tree_caches_match_brute_force(m in measure_strategy(2, 3, 10)) {
        let tree = disintegrate(&m);
        for t in 0..m.horizon() {
            let level = tree.level(t);
            for i in 0..level.len() {
                let kids = level.children(i);
                if !kids.is_empty() {
                    let s: f64 = tree.level(t + 1).cond_weights_of(kids).iter().sum();
                    prop_assert!((s - 1.0).abs() <= 1e-12);
                }
                let prefix = &m.path(level.atoms(i).start)[..(t + 1) * m.d()];
                prop_assert!((level.future(i) - brute_future(&m, prefix)).abs() <= 1e-9);
                prop_assert!((level.prefix_norm(i) - sum_norm(prefix, m.d())).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn linear_moment_coefficient_matches_exhaustive_search(m in measure_strategy(2, 3, 10)) {
        let d = m.d();
        let mut best: f64 = 0.0;
        for t in 1..m.horizon() {
            for (p, _) in m.atoms() {
                let prefix = &p[..t * d];
                let (mut num, mut den) = (0.0, 0.0);
                for (q, w) in m.atoms() {
                    if &q[..t * d] == prefix {
                        num += w * stage_norm(&q[t * d..(t + 1) * d]);
                        den += w;
                    }
                }
                best = best.max(num / den / (sum_norm(prefix, d) + 1.0));
            }
        }
        prop_assert!((linear_moment_coefficient(&disintegrate(&m)) - best).abs() <= 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_close(m in real_measure(2, 2), delta in 0.05f64..2.0) {
        let g = GridSpec::new(delta, 4).unwrap();
        let p = adapted_project(&g, &m).unwrap();
        let again = adapted_project(&g, &p).unwrap();
        prop_assert_eq!(again.coords(), p.coords());
        for (a, b) in again.weights().iter().zip(p.weights()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert!((p.total_mass() - 1.0).abs() <= 1e-12);
        let gf = g.g() as f64;
        for &x in p.coords() {
            // (z + 1/2) / G for an integer z
            let z = x * gf - 0.5;
            prop_assert!((z - z.round()).abs() <= 1e-9 * (1.0 + z.abs()));
            prop_assert!(g.is_midpoint(x));
        }
        for (x, _) in m.atoms() {
            let y: Vec<f64> = x.iter().map(|&v| g.midpoint(v)).collect();
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() < g.half_cell() + 1e-12);
            }
            prop_assert!(p.mass_at(&y) > 0.0);
        }
    }

    #[test]
    fn shift_and_truncate_keep_mass(m in real_measure(1, 3), z in prop::collection::vec(-1.0f64..1.0, 3), r in 1.0f64..10.0) {
        prop_assert!((shift(&m, &z).unwrap().total_mass() - 1.0).abs() <= 1e-12);
        let back = shift(&shift(&m, &z).unwrap(), &z.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(back.len(), m.len());
        for i in 0..m.len() {
            for (a, b) in back.path(i).iter().zip(m.path(i)) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
        let tr = truncate(&m, r).unwrap();
        prop_assert!((tr.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(tr.coords().iter().all(|v| v.abs() <= r + 1.0));
    }

    #[test]
    fn truncation_norm_bound(m in real_measure(2, 3), r in 1.0f64..10.0) {
        // each atom separately, so the bound is checked per path
        for (x, _) in m.atoms() {
            let single = DiscretePathMeasure::new(2, 3, vec![(x.to_vec(), 1.0)]).unwrap();
            let y = truncate(&single, r).unwrap();
            let bound = 2.0 * 3.0 * 2f64.sqrt() * sum_norm(x, 2);
            prop_assert!(sum_norm(y.path(0), 2) <= bound + 1e-12);
        }
    }

    #[test]
    fn second_moment_matches_direct_sum(m in real_measure(2, 2)) {
        let direct: f64 = m.atoms().map(|(p, w)| w * sum_norm(p, 2).powi(2)).sum();
        prop_assert!((moment(&m, 2.0).unwrap() - direct).abs() <= 1e-9 * (1.0 + direct));
    }
}

#[test]
fn split_pair_tree_shape() {
    let mu = DiscretePathMeasure::new(1, 2, vec![(vec![0.0, 1.0], 0.5), (vec![0.0, -1.0], 0.5)]).unwrap();
    let tree = disintegrate(&mu);
    assert_eq!(tree.level(0).len(), 1);
    assert_eq!(tree.level(0).cond_weight(0), 1.0);
    let kids = tree.level(0).children(0);
    assert_eq!(tree.level(1).cond_weights_of(kids), &[0.5, 0.5]);
}

#[test]
fn truncation_replaces_stages_after_exit() {
    let m = DiscretePathMeasure::new(1, 2, vec![(vec![0.0, 5.0], 1.0)]).unwrap();
    assert_eq!(truncate(&m, 1.0).unwrap().path(0), &[0.0, 2.0]);
}
