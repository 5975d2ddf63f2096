use super::{default_epsilon, GilConfig};
use crate::model::InverseProblem;
use crate::numeric::linalg::dot;
use crate::numeric::lpfile::{LpModel, Sense};
use crate::numeric::VarBound;

/// The GIL mixed-integer program with big-M indicator constraints, for
/// cross-checking with an external solver.
pub fn gil_milp_model(problem: &InverseProblem, cfg: &GilConfig, big_m: f64) -> LpModel {
    let region = &problem.region;
    let (n, m) = (region.n(), region.m());
    let h = &problem.hierarchy;
    let eps = cfg.epsilon.unwrap_or_else(|| default_epsilon(region));
    let obs = &problem.observations;
    let k = obs.count() as f64;
    let xbar = obs.centroid();
    let mut model = LpModel::default();
    let z: Vec<usize> = (0..n).map(|j| model.add_var(format!("z{}", j + 1), VarBound::FREE)).collect();
    let theta: Vec<usize> = (0..n).map(|j| model.add_var(format!("theta{}", j + 1), VarBound::range(0.0, 1.0))).collect();
    let lambda: Vec<usize> = (0..m).map(|i| model.add_var(format!("lambda{}", i + 1), VarBound::NONNEG)).collect();
    let v: Vec<usize> = (0..m).map(|i| model.add_var(format!("v{}", i + 1), VarBound::range(0.0, 1.0))).collect();
    model.binaries = v.clone();

    for j in 0..n {
        model.linear[z[j]] = -2.0 * cfg.omega * k * xbar[j];
        model.quadratic.push((z[j], z[j], cfg.omega * k));
    }
    model.constant = cfg.omega * (k * dot(xbar, xbar) + obs.sq_dev());
    for &p in h.preferred() {
        model.linear[v[p]] = -(1.0 - cfg.omega);
    }

    let row_terms = |i: usize| z.iter().zip(region.row(i)).map(|(&zj, &a)| (zj, a)).collect::<Vec<_>>();
    for i in 0..m {
        let b = region.rhs(i);
        model.add_row(format!("feas{}", i + 1), row_terms(i), Sense::Ge, b);
        let mut bind = row_terms(i);
        bind.push((v[i], big_m));
        model.add_row(format!("bind{}", i + 1), bind, Sense::Le, b + big_m);
        model.add_row(format!("dual{}", i + 1), vec![(lambda[i], 1.0), (v[i], -big_m)], Sense::Le, 0.0);
        if h.is_relevant(i) {
            let mut slack = row_terms(i);
            slack.push((v[i], eps));
            model.add_row(format!("slack{}", i + 1), slack, Sense::Ge, b + eps);
        }
    }
    for j in 0..n {
        let mut terms = vec![(theta[j], 1.0)];
        terms.extend((0..m).map(|i| (lambda[i], -region.row(i)[j])));
        model.add_row(format!("stat{}", j + 1), terms, Sense::Eq, 0.0);
    }
    model.add_row("norm", theta.iter().map(|&t| (t, 1.0)).collect(), Sense::Eq, 1.0);
    if let Some(a) = problem.normalization.anchor {
        model.add_row("anchor", vec![(theta[a.index], 1.0)], Sense::Ge, a.floor);
    }
    model.add_row("card", h.relevant().iter().map(|&i| (v[i], 1.0)).collect(), Sense::Eq, cfg.r as f64);
    model
}
