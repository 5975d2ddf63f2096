use invlearn_core::numeric::linalg::{dot, DenseMatrix};
use invlearn_core::numeric::{project_point, solve_lp, LpSpec, LpStatus, ProjectionSpec};
use proptest::prelude::*;

/// A bounded, feasible polytope `{x : G x ≥ h}` in `n` dimensions that
/// contains `x0`, with a box `|x_j| ≤ 5` appended.
fn polytope() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..5, 1usize..7).prop_flat_map(|(n, m)| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, n), m),
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(0.0..2.0f64, m),
        )
            .prop_map(|(n, rows, x0, slack)| {
                let mut g = rows;
                let mut h: Vec<f64> = g.iter().zip(&slack).map(|(r, s)| dot(r, &x0) - s).collect();
                for j in 0..n {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    g.push(e.clone());
                    h.push(-5.0);
                    e[j] = -1.0;
                    g.push(e);
                    h.push(-5.0);
                }
                (n, g, h)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lp_optimality_certificates((n, g, h) in polytope(), c in prop::collection::vec(-1.0..1.0f64, 4)) {
        let c: Vec<f64> = c[..n].to_vec();
        let mut spec = LpSpec::new(c.clone());
        for (r, &b) in g.iter().zip(&h) {
            spec.push_ineq(r, b).unwrap();
        }
        let out = solve_lp(&spec).unwrap();
        prop_assert_eq!(out.status, LpStatus::Optimal);
        for ((r, &b), &l) in g.iter().zip(&h).zip(&out.ineq_duals) {
            let s = dot(r, &out.x) - b;
            prop_assert!(s >= -1e-7, "violation {}", s);
            prop_assert!(l > -1e-9, "negative dual {}", l);
            prop_assert!((l * s).abs() <= 1e-7, "complementarity {}", l * s);
        }
        // Dual feasibility Gᵀλ = c and strong duality cᵀx = hᵀλ.
        let gm = DenseMatrix::from_rows(n, &g).unwrap();
        let gtl = gm.tr_mul_vec(&out.ineq_duals);
        for (a, b) in gtl.iter().zip(&c) {
            prop_assert!((a - b).abs() <= 1e-7);
        }
        prop_assert!((dot(&c, &out.x) - dot(&h, &out.ineq_duals)).abs() <= 1e-7);
        // Same spec, same bytes.
        let again = solve_lp(&spec).unwrap();
        prop_assert_eq!(serde_json::to_string(&out).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn projection_kkt_and_idempotence((n, g, h) in polytope(), c in prop::collection::vec(-8.0..8.0f64, 4)) {
        let c: Vec<f64> = c[..n].to_vec();
        let mut spec = ProjectionSpec::new(c.clone());
        for (r, &b) in g.iter().zip(&h) {
            spec.push_ineq(r, b).unwrap();
        }
        let p = project_point(&spec).unwrap();
        let gm = DenseMatrix::from_rows(n, &g).unwrap();
        let gtl = gm.tr_mul_vec(&p.multipliers);
        for j in 0..n {
            prop_assert!((p.point[j] - c[j] - gtl[j]).abs() <= 1e-7);
        }
        prop_assert!(p.multipliers.iter().all(|&l| l >= 0.0));
        for (i, (r, &b)) in g.iter().zip(&h).enumerate() {
            let s = dot(r, &p.point) - b;
            prop_assert!(s >= -1e-9);
            prop_assert_eq!(p.active.contains(&i), s.abs() <= 1e-7);
        }
        let mut again = spec.clone();
        again.target = p.point.clone();
        let q = project_point(&again).unwrap();
        for j in 0..n {
            prop_assert!((q.point[j] - p.point[j]).abs() <= 1e-9);
        }
    }

    #[test]
    fn projection_is_nonexpansive(
        (n, g, h) in polytope(),
        c1 in prop::collection::vec(-8.0..8.0f64, 4),
        c2 in prop::collection::vec(-8.0..8.0f64, 4),
        pin in any::<bool>(),
    ) {
        let build = |c: &[f64]| {
            let mut spec = ProjectionSpec::new(c[..n].to_vec());
            if pin {
                // Force the first generated row to equality; keeps the system feasible
                // only when it passes through the interior, so fall back on error.
                spec.push_eq(&g[0], h[0]).unwrap();
            }
            for (r, &b) in g.iter().zip(&h) {
                spec.push_ineq(r, b).unwrap();
            }
            project_point(&spec)
        };
        if let (Ok(p1), Ok(p2)) = (build(&c1), build(&c2)) {
            let dz: f64 = p1.point.iter().zip(&p2.point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let dc: f64 = c1[..n].iter().zip(&c2[..n]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prop_assert!(dz <= dc + 1e-9);
        }
    }
}
