use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{tie_tol, validate, SolveError};
use crate::model::{InverseProblem, LossKind};
use crate::numeric::linalg::{dist2, dot};
use crate::numeric::{project_point, solve_lp, LpSpec, LpStatus, NumericError, ProjectionSpec, VarBound};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSolution {
    pub theta: Vec<f64>,
    /// Per-observation projections onto the optimal face for `theta`.
    pub points: Vec<Vec<f64>>,
    pub loss: f64,
    /// The forward LP's own optimal vertex for `theta`.
    pub forward_point: Vec<f64>,
    pub candidates: usize,
}

/// Classical inverse optimization by decomposition: enumerate candidate
/// parameters, solve the forward LP for each, project every observation
/// onto the resulting optimal face, keep the cheapest.
///
/// Candidates are the rows that normalize into `Θ`, then up to
/// `vertex_samples` vertices of `{θ = Aᵀλ, λ ≥ 0, θ ∈ Θ}`: the first minimizes
/// the total duality gap of the centroid, the rest add a random linear tilt.
pub fn solve_ilo_baseline(problem: &InverseProblem, vertex_samples: usize, seed: u64) -> Result<BaselineSolution, SolveError> {
    validate(problem)?;
    let points = problem.observations.points().ok_or(SolveError::NeedsPoints)?;
    let region = &problem.region;
    let (n, m) = (region.n(), region.m());
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let push = |theta: Vec<f64>, list: &mut Vec<Vec<f64>>| {
        if !list.iter().any(|t| dist2(t, &theta) < 1e-18) {
            list.push(theta);
        }
    };
    for i in 0..m {
        let a = region.row(i);
        let sum: f64 = a.iter().sum();
        if a.iter().all(|&v| v >= -1e-12) && sum > 1e-12 {
            let theta: Vec<f64> = a.iter().map(|v| v.max(0.0) / sum).collect();
            if problem.normalization.contains(&theta, 1e-12) {
                push(theta, &mut candidates);
            }
        }
    }
    if vertex_samples > 0 {
        let centroid = problem.observations.centroid();
        let gap: Vec<f64> = (0..m).map(|i| region.slack(i, centroid)).collect();
        let scale = 1.0 + gap.iter().map(|g| g.abs()).sum::<f64>() / m as f64;
        let theta_rows = region.a().transpose().to_rows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in 0..vertex_samples {
            let w: Vec<f64> = if v == 0 {
                vec![0.0; n]
            } else {
                (0..n).map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect()
            };
            let cost: Vec<f64> = (0..m).map(|i| gap[i] + dot(region.row(i), &w)).collect();
            let mut lp = LpSpec::new(cost).with_bounds(vec![VarBound::NONNEG; m]);
            problem.normalization.push_constraints(&mut lp, &theta_rows)?;
            let out = solve_lp(&lp)?;
            if out.status == LpStatus::Optimal {
                push(region.a().tr_mul_vec(&out.x), &mut candidates);
            }
        }
    }
    if candidates.is_empty() {
        return Err(SolveError::NoCandidate);
    }
    let total = candidates.len();
    let mut best: Option<BaselineSolution> = None;
    for theta in candidates {
        let fwd = solve_lp(&region.forward_lp(&theta))?;
        if fwd.status != LpStatus::Optimal {
            continue;
        }
        let mut proj = Vec::with_capacity(points.len());
        let mut loss = 0.0;
        let mut ok = true;
        for x in points {
            let mut spec = ProjectionSpec::new(x.clone());
            spec.push_eq(&theta, fwd.objective)?;
            for i in 0..m {
                spec.push_ineq(region.row(i), region.rhs(i))?;
            }
            match project_point(&spec) {
                Ok(p) => {
                    loss += match problem.loss {
                        LossKind::Squared => p.sq_distance,
                        LossKind::L1 => p.point.iter().zip(x).map(|(a, b)| (a - b).abs()).sum(),
                    };
                    proj.push(p.point);
                }
                Err(NumericError::Infeasible(_)) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !ok {
            continue;
        }
        if best.as_ref().is_none_or(|b| loss < b.loss - tie_tol(b.loss)) {
            best = Some(BaselineSolution { theta, points: proj, loss, forward_point: fwd.x, candidates: total });
        }
    }
    best.ok_or(SolveError::NoCandidate)
}
