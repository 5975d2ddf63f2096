#![allow(dead_code)]

use invlearn_core::model::{ConstraintHierarchy, InverseProblem, ObservationSummary, PolyhedralRegion};
use proptest::prelude::*;

/// Box `[−1,1]^n` followed by `extra` random rows strictly slack at the origin.
pub fn region_strategy(n: usize, extra: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PolyhedralRegion> {
    prop::collection::vec((prop::collection::vec(-1.0f64..1.0, n), 0.2f64..1.0), extra).prop_filter_map("zero row", move |rows| {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            a.push(e.clone());
            b.push(-1.0);
            e[j] = -1.0;
            a.push(e);
            b.push(-1.0);
        }
        for (row, s) in rows {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 0.2 {
                return None;
            }
            let unit: Vec<f64> = row.iter().map(|v| v / norm).collect();
            a.push(unit);
            b.push(-s);
        }
        PolyhedralRegion::from_rows(&a, b).ok()
    })
}

pub fn points_strategy(n: usize, k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), k)
}

pub fn problem_strategy(n: usize) -> impl Strategy<Value = InverseProblem> {
    let extra = if n == 2 { 0..=4 } else { 0..=3 };
    (region_strategy(n, extra), points_strategy(n, 1..=4))
        .prop_map(|(region, pts)| InverseProblem::new(region, ObservationSummary::from_points(&pts, true).unwrap()))
}

/// A problem with a random nonempty relevant set and a preferred subset.
pub fn hierarchy_problem_strategy(n: usize) -> impl Strategy<Value = InverseProblem> {
    problem_strategy(n).prop_flat_map(|p| {
        let m = p.m();
        (Just(p), prop::collection::vec(any::<bool>(), m), prop::collection::vec(any::<bool>(), m)).prop_filter_map(
            "empty relevant set",
            |(p, rel, pref)| {
                let relevant: Vec<usize> = (0..rel.len()).filter(|&i| rel[i]).collect();
                if relevant.is_empty() {
                    return None;
                }
                let preferred = relevant.iter().copied().filter(|&i| pref[i]).collect();
                Some(p.with_hierarchy(ConstraintHierarchy::new(relevant, preferred)))
            },
        )
    })
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
