use adapted_ot::path_measure::{sum_norm, DiscretePathMeasure};
use adapted_ot::transport::{
    solve_ot, tv, tv1_closed_form, tv1_coupling_form, tv_coupling_form, w1, w1_line, w1_with_coupling, CostMatrix,
};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use proptest::prelude::*;

fn weights(raw: &[u32]) -> Vec<f64> {
    let total: f64 = raw.iter().map(|&w| w as f64).sum();
    raw.iter().map(|&w| w as f64 / total).collect()
}

/// Same OT problem through a general-purpose LP solver.
fn lp_value(c: &CostMatrix, a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n * m).map(|k| p.add_var(c.data()[k], (0.0, f64::INFINITY))).collect();
    for i in 0..n {
        let row: Vec<_> = (0..m).map(|j| (vars[i * m + j], 1.0)).collect();
        p.add_constraint(&row, ComparisonOp::Eq, a[i]);
    }
    for j in 0..m - 1 {
        let col: Vec<_> = (0..n).map(|i| (vars[i * m + j], 1.0)).collect();
        p.add_constraint(&col, ComparisonOp::Eq, b[j]);
    }
    p.solve().unwrap().into_solution().unwrap().objective()
}

fn ot_instance(n: usize, m: usize) -> impl Strategy<Value = (CostMatrix, Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.0f64..10.0, n * m),
        prop::collection::vec(1u32..50, n),
        prop::collection::vec(1u32..50, m),
    )
        .prop_map(move |(c, a, b)| (CostMatrix::new(n, m, c).unwrap(), weights(&a), weights(&b)))
}

fn measure(t: usize) -> impl Strategy<Value = DiscretePathMeasure> {
    prop::collection::vec((prop::collection::vec(-3i32..=3, t), 1u32..20), 1..6).prop_map(move |atoms| {
        let w = weights(&atoms.iter().map(|a| a.1).collect::<Vec<_>>());
        let atoms = atoms
            .into_iter()
            .zip(w)
            .map(|((p, _), w)| (p.into_iter().map(|v| v as f64 * 0.5).collect(), w))
            .collect();
        DiscretePathMeasure::new(1, t, atoms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_matches_lp((c, a, b) in ot_instance(3, 4)) {
        let s = solve_ot(&c, &a, &b).unwrap();
        prop_assert!((s.value - lp_value(&c, &a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn dual_certificate((c, a, b) in ot_instance(6, 7)) {
        let s = solve_ot(&c, &a, &b).unwrap();
        prop_assert!(s.coupling.has_marginals(&a, &b, 1e-9));
        prop_assert!((s.coupling.cost(&c) - s.value).abs() <= 1e-9);
        prop_assert!((s.dual_value(&a, &b) - s.value).abs() <= 1e-9);
        for i in 0..6 {
            for j in 0..7 {
                prop_assert!(s.u[i] + s.v[j] <= c.get(i, j) + 1e-9);
            }
        }
        for &(i, j, _) in &s.coupling.entries {
            prop_assert!((s.u[i] + s.v[j] - c.get(i, j)).abs() <= 1e-9);
        }
    }

    #[test]
    fn line_w1_matches_solver(
        x in prop::collection::vec(-5.0f64..5.0, 1..6),
        y in prop::collection::vec(-5.0f64..5.0, 1..6),
        seed in 1u32..1000,
    ) {
        let a = weights(&(0..x.len() as u32).map(|k| 1 + (seed + 7 * k) % 13).collect::<Vec<_>>());
        let b = weights(&(0..y.len() as u32).map(|k| 1 + (seed + 11 * k) % 17).collect::<Vec<_>>());
        let c = CostMatrix::from_fn(x.len(), y.len(), |i, j| (x[i] - y[j]).abs()).unwrap();
        let exact = solve_ot(&c, &a, &b).unwrap().value;
        prop_assert!((w1_line(&x, &a, &y, &b) - exact).abs() <= 1e-9);
    }

    #[test]
    fn metric_axioms(mu in measure(2), nu in measure(2), rho in measure(2)) {
        for dist in [w1, tv1_closed_form] {
            let (ab, ba) = (dist(&mu, &nu).unwrap(), dist(&nu, &mu).unwrap());
            prop_assert!((ab - ba).abs() <= 1e-9);
            prop_assert!(dist(&mu, &mu).unwrap().abs() <= 1e-12);
            prop_assert!(ab <= dist(&mu, &rho).unwrap() + dist(&rho, &nu).unwrap() + 1e-9);
        }
    }

    #[test]
    fn closed_and_coupling_forms_agree(mu in measure(2), nu in measure(2)) {
        prop_assert!((tv(&mu, &nu).unwrap() - tv_coupling_form(&mu, &nu).unwrap()).abs() <= 1e-9);
        let closed = tv1_closed_form(&mu, &nu).unwrap();
        prop_assert!((closed - tv1_coupling_form(&mu, &nu).unwrap()).abs() <= 1e-9);
        prop_assert!(w1(&mu, &nu).unwrap() <= closed + 1e-9);
        let s = w1_with_coupling(&mu, &nu).unwrap();
        prop_assert!(s.coupling.has_marginals(mu.weights(), nu.weights(), 1e-9));
    }

    #[test]
    fn disjoint_supports_add_up(mu in measure(2), shift in 10.0f64..20.0) {
        let nu = mu.map_paths(|src, dst| src.iter().zip(dst).for_each(|(s, d)| *d = s + shift)).unwrap();
        let direct: f64 = mu.atoms().chain(nu.atoms()).map(|(p, w)| (sum_norm(p, 1) + 0.5) * w).sum();
        prop_assert!((tv1_closed_form(&mu, &nu).unwrap() - direct).abs() <= 1e-9);
        prop_assert!((tv(&mu, &nu).unwrap() - 1.0).abs() <= 1e-12);
    }
}
