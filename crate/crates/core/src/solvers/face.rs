use std::collections::HashMap;

use crate::geometry::generators;
use crate::geometry::cone_meets_normalization;
use crate::model::{InverseProblem, LossKind};
use crate::numeric::linalg::{affine_distance_sq, dot, rank};
use crate::numeric::{project_point, solve_lp, LpSpec, LpStatus, NumericError, ProjectionSpec, VarBound};

use super::{tight_tol, SearchStats, SolveError};

#[derive(Debug, Clone)]
pub(crate) struct FacePoint {
    pub z: Vec<f64>,
    /// Search units: `‖z − x̄‖²` for squared loss, the loss itself for l1.
    pub score: f64,
    pub loss: f64,
}

#[derive(Debug)]
struct Breakpoints {
    values: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Debug)]
enum Target {
    Squared { centroid: Vec<f64>, count: f64, sq_dev: f64 },
    L1 { anchor: Vec<f64>, weight: f64, coords: Vec<Breakpoints> },
}

/// Projects the data onto faces of the region, with memoization of faces
/// and cone checks for the lifetime of one solve.
pub(crate) struct Evaluator<'p> {
    pub problem: &'p InverseProblem,
    target: Target,
    pub eps: f64,
    pub tight_tol: f64,
    faces: HashMap<(Vec<usize>, Vec<usize>), Option<FacePoint>>,
    cones: HashMap<Vec<usize>, bool>,
    pub stats: SearchStats,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p InverseProblem, eps: f64) -> Result<Self, SolveError> {
        let obs = &problem.observations;
        let target = match problem.loss {
            LossKind::Squared => Target::Squared {
                centroid: obs.centroid().to_vec(),
                count: obs.count() as f64,
                sq_dev: obs.sq_dev(),
            },
            LossKind::L1 => {
                let (points, weights, anchor): (Vec<&[f64]>, Vec<f64>, Vec<f64>) = match (obs.points(), obs.median()) {
                    (Some(p), _) => (p.iter().map(Vec::as_slice).collect(), vec![1.0; p.len()], obs.centroid().to_vec()),
                    (None, Some(md)) => (vec![md], vec![obs.count() as f64], md.to_vec()),
                    (None, None) => return Err(SolveError::Invalid(problem.validate())),
                };
                let coords = (0..problem.n()).map(|j| breakpoints(&points, &weights, j)).collect();
                Target::L1 { anchor, weight: obs.count() as f64, coords }
            }
        };
        Ok(Self {
            problem,
            target,
            eps,
            tight_tol: tight_tol(&problem.region),
            faces: HashMap::new(),
            cones: HashMap::new(),
            stats: SearchStats::default(),
        })
    }

    pub fn loss_of(&self, score: f64) -> f64 {
        match &self.target {
            Target::Squared { count, sq_dev, .. } => count * score + sq_dev,
            Target::L1 { .. } => score,
        }
    }

    /// Lower bound on the score over the affine hull of the `eq` rows, or
    /// `None` when those equalities are inconsistent.
    pub fn affine_bound(&self, eq: &[usize]) -> Option<f64> {
        let region = &self.problem.region;
        let rows: Vec<&[f64]> = eq.iter().map(|&i| region.row(i)).collect();
        let d: Vec<f64> = eq.iter().map(|&i| region.rhs(i)).collect();
        match &self.target {
            Target::Squared { centroid, .. } => affine_distance_sq(&rows, &d, centroid),
            Target::L1 { anchor, weight, .. } => affine_distance_sq(&rows, &d, anchor).map(|s| weight * s.sqrt()),
        }
    }

    /// True when the rows of `set` plus `j` are linearly independent.
    pub fn independent(&self, set: &[usize], j: usize) -> bool {
        let mut idx = set.to_vec();
        idx.push(j);
        let g = generators(&self.problem.region, &idx);
        rank(&g, g.default_rank_tol()) == idx.len()
    }

    pub fn tight(&self, z: &[f64]) -> Vec<usize> {
        self.problem.region.tight_rows(z, self.tight_tol)
    }

    pub fn cone_ok(&mut self, rows: &[usize]) -> Result<bool, SolveError> {
        if rows.is_empty() {
            return Ok(false);
        }
        if let Some(&ok) = self.cones.get(rows) {
            return Ok(ok);
        }
        self.stats.cone_checks += 1;
        let g = generators(&self.problem.region, rows);
        let ok = cone_meets_normalization(&g, &self.problem.normalization)?.is_some();
        self.cones.insert(rows.to_vec(), ok);
        Ok(ok)
    }

    /// Best point of `{a_iᵀz = b_i (i ∈ eq), a_iᵀz ≥ b_i + ε (i ∈ strict)} ∩ Ω`.
    pub fn project(&mut self, eq: &[usize], strict: &[usize]) -> Result<Option<FacePoint>, SolveError> {
        let key = (eq.to_vec(), strict.to_vec());
        if let Some(hit) = self.faces.get(&key) {
            return Ok(hit.clone());
        }
        self.stats.projections += 1;
        let out = match &self.target {
            Target::Squared { .. } => self.project_squared(eq, strict)?,
            Target::L1 { .. } => self.project_l1(eq, strict)?,
        };
        self.faces.insert(key, out.clone());
        Ok(out)
    }

    fn rhs_for(&self, i: usize, strict: &[usize]) -> f64 {
        let b = self.problem.region.rhs(i);
        if strict.binary_search(&i).is_ok() {
            b + self.eps
        } else {
            b
        }
    }

    fn project_squared(&self, eq: &[usize], strict: &[usize]) -> Result<Option<FacePoint>, SolveError> {
        let Target::Squared { centroid, .. } = &self.target else { unreachable!() };
        let region = &self.problem.region;
        let mut spec = ProjectionSpec::new(centroid.clone());
        for i in 0..region.m() {
            if eq.binary_search(&i).is_ok() {
                spec.push_eq(region.row(i), region.rhs(i))?;
            } else {
                spec.push_ineq(region.row(i), self.rhs_for(i, strict))?;
            }
        }
        match project_point(&spec) {
            Ok(p) => {
                let score = p.sq_distance;
                Ok(Some(FacePoint { loss: self.loss_of(score), z: p.point, score }))
            }
            Err(NumericError::Infeasible(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Piecewise-linear LP: per coordinate `z_j = β₁ − u + Σ δ_s + v` with
    /// segment lengths bounding `δ_s` and slopes `2·C_s − W`.
    fn project_l1(&self, eq: &[usize], strict: &[usize]) -> Result<Option<FacePoint>, SolveError> {
        let Target::L1 { coords, .. } = &self.target else { unreachable!() };
        if coords.iter().map(|bp| bp.values.len()).sum::<usize>() > L1_CUT_THRESHOLD {
            return self.project_l1_cuts(eq, strict);
        }
        let region = &self.problem.region;
        let mut cost = Vec::new();
        let mut bounds = Vec::new();
        let mut owner = Vec::new();
        for (j, bp) in coords.iter().enumerate() {
            let total: f64 = bp.weights.iter().sum();
            cost.push(total);
            bounds.push(VarBound::NONNEG);
            owner.push((j, -1.0));
            let mut cum = 0.0;
            for s in 0..bp.values.len() - 1 {
                cum += bp.weights[s];
                cost.push(2.0 * cum - total);
                bounds.push(VarBound::range(0.0, bp.values[s + 1] - bp.values[s]));
                owner.push((j, 1.0));
            }
            cost.push(total);
            bounds.push(VarBound::NONNEG);
            owner.push((j, 1.0));
        }
        let base: Vec<f64> = coords.iter().map(|bp| bp.values[0]).collect();
        let mut lp = LpSpec::new(cost).with_bounds(bounds);
        for i in 0..region.m() {
            let a = region.row(i);
            let row: Vec<f64> = owner.iter().map(|&(j, s)| s * a[j]).collect();
            let shift = dot(a, &base);
            if eq.binary_search(&i).is_ok() {
                lp.push_eq(&row, region.rhs(i) - shift)?;
            } else {
                lp.push_ineq(&row, self.rhs_for(i, strict) - shift)?;
            }
        }
        let out = solve_lp(&lp)?;
        if out.status != LpStatus::Optimal {
            return Ok(None);
        }
        let mut z = base;
        for (&(j, s), v) in owner.iter().zip(&out.x) {
            z[j] += s * v;
        }
        let loss: f64 = coords
            .iter()
            .zip(&z)
            .map(|(bp, zj)| bp.values.iter().zip(&bp.weights).map(|(b, w)| w * (zj - b).abs()).sum::<f64>())
            .sum();
        Ok(Some(FacePoint { z, score: loss, loss }))
    }

    /// Kelley cutting planes on the epigraph `t_j ≥ f_j(z_j)`; each cut is
    /// one linear piece of `f_j`, so the loop ends after finitely many rounds
    /// with the same optimum as the breakpoint LP.
    fn project_l1_cuts(&self, eq: &[usize], strict: &[usize]) -> Result<Option<FacePoint>, SolveError> {
        let Target::L1 { coords, .. } = &self.target else { unreachable!() };
        let region = &self.problem.region;
        let n = coords.len();
        let mut cost = vec![0.0; n];
        cost.resize(2 * n, 1.0);
        let mut lp = LpSpec::new(cost).with_bounds(vec![VarBound::FREE; 2 * n]);
        for i in 0..region.m() {
            let mut row = region.row(i).to_vec();
            row.resize(2 * n, 0.0);
            if eq.binary_search(&i).is_ok() {
                lp.push_eq(&row, region.rhs(i))?;
            } else {
                lp.push_ineq(&row, self.rhs_for(i, strict))?;
            }
        }
        // Every cut is an exact piece of f_j, so (j, slope) identifies it.
        let mut seen = std::collections::HashSet::new();
        let mut push_cut = |lp: &mut LpSpec, j: usize, v: f64, slope: f64, fv: f64| -> Result<bool, NumericError> {
            if !seen.insert((j, slope.to_bits())) {
                return Ok(false);
            }
            let mut row = vec![0.0; 2 * n];
            row[j] = -slope;
            row[n + j] = 1.0;
            lp.push_ineq(&row, fv - slope * v)?;
            Ok(true)
        };
        // Cuts are on f_j / W (slopes in [-1, 1]) for conditioning.
        let scale: f64 = coords[0].weights.iter().sum();
        for (j, bp) in coords.iter().enumerate() {
            let (lo, hi) = (bp.values[0], bp.values[bp.values.len() - 1]);
            push_cut(&mut lp, j, lo, -1.0, bp.eval(lo) / scale)?;
            push_cut(&mut lp, j, hi, 1.0, bp.eval(hi) / scale)?;
            for q in [0.25, 0.5, 0.75] {
                let v = bp.quantile(q);
                let (left, right) = bp.slopes(v);
                push_cut(&mut lp, j, v, right / scale, bp.eval(v) / scale)?;
                push_cut(&mut lp, j, v, left / scale, bp.eval(v) / scale)?;
            }
        }
        for _ in 0..L1_CUT_ROUNDS {
            let out = solve_lp(&lp)?;
            if out.status != LpStatus::Optimal {
                return Ok(None);
            }
            let z = out.x[..n].to_vec();
            let values: Vec<f64> = coords.iter().zip(&z).map(|(bp, zj)| bp.eval(*zj)).collect();
            let loss: f64 = values.iter().sum();
            let tol = 1e-10 * (1.0 + loss / scale);
            let mut added = false;
            for j in 0..n {
                if values[j] / scale - out.x[n + j] > tol {
                    let (left, right) = coords[j].slopes(z[j]);
                    added |= push_cut(&mut lp, j, z[j], right / scale, values[j] / scale)?;
                    added |= push_cut(&mut lp, j, z[j], left / scale, values[j] / scale)?;
                }
            }
            if !added {
                return Ok(Some(FacePoint { z, score: loss, loss }));
            }
        }
        Err(NumericError::IterationLimit(L1_CUT_ROUNDS).into())
    }
}

/// Above this many breakpoints in total the l1 face solve switches from the
/// breakpoint LP to cutting planes.
const L1_CUT_THRESHOLD: usize = 2000;
const L1_CUT_ROUNDS: usize = 10_000;

impl Breakpoints {
    fn eval(&self, v: f64) -> f64 {
        self.values.iter().zip(&self.weights).map(|(b, w)| w * (v - b).abs()).sum()
    }

    /// Left and right derivatives at `v`.
    fn slopes(&self, v: f64) -> (f64, f64) {
        let total: f64 = self.weights.iter().sum();
        let below: f64 = self.values.iter().zip(&self.weights).filter(|(b, _)| **b < v).map(|(_, w)| w).sum();
        let at: f64 = self.values.iter().zip(&self.weights).filter(|(b, _)| **b == v).map(|(_, w)| w).sum();
        (2.0 * below - total, 2.0 * (below + at) - total)
    }

    /// Weighted quantile; `q = 0.5` is a minimizer of `eval`.
    fn quantile(&self, q: f64) -> f64 {
        let half = self.weights.iter().sum::<f64>() * q;
        let mut cum = 0.0;
        for (b, w) in self.values.iter().zip(&self.weights) {
            cum += w;
            if cum >= half {
                return *b;
            }
        }
        self.values[self.values.len() - 1]
    }
}

fn breakpoints(points: &[&[f64]], weights: &[f64], j: usize) -> Breakpoints {
    let mut pairs: Vec<(f64, f64)> = points.iter().zip(weights).map(|(p, w)| (p[j], *w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut values: Vec<f64> = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    for (v, w) in pairs {
        if values.last() == Some(&v) {
            *ws.last_mut().expect("nonempty") += w;
        } else {
            values.push(v);
            ws.push(w);
        }
    }
    Breakpoints { values, weights: ws }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObservationSummary;
    use crate::solvers::fixtures::triangle;

    #[test]
    fn l1_face_matches_grid_oracle() {
        let pts = vec![vec![0.1, 0.9], vec![0.5, 0.2], vec![0.4, 0.4], vec![0.9, 0.8]];
        let p = InverseProblem::new(triangle(), ObservationSummary::from_points(&pts, true).unwrap()).with_loss(LossKind::L1);
        let mut ev = Evaluator::new(&p, 1e-4).unwrap();
        let face = ev.project(&[2], &[]).unwrap().unwrap();
        // Oracle: scan the hypotenuse x₁ + x₂ = 1.
        let best = (0..=10_000)
            .map(|k| {
                let t = k as f64 / 10_000.0;
                p.total_loss(&[t, 1.0 - t]).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((face.loss - best).abs() < 1e-3, "{} vs {best}", face.loss);
        assert!((face.loss - p.total_loss(&face.z).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn l1_cutting_planes_match_breakpoint_lp() {
        let pts: Vec<Vec<f64>> = (0..60u32)
            .map(|k| {
                let t = f64::from(k);
                vec![(t * 0.37).sin() * 0.8 + 0.3, (t * 0.91).cos() * 0.6 + 0.2, ((t * 1.3).sin() + 1.0) * 0.4]
            })
            .collect();
        let region = crate::model::PolyhedralRegion::from_rows(
            &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![-1.0, -1.0, -1.0], vec![-1.0, 2.0, 0.0]],
            vec![0.0, 0.0, 0.0, -1.0, -0.5],
        )
        .unwrap();
        let p = InverseProblem::new(region, ObservationSummary::from_points(&pts, true).unwrap()).with_loss(LossKind::L1);
        let ev = Evaluator::new(&p, 1e-4).unwrap();
        for (eq, strict) in [(vec![], vec![]), (vec![3], vec![]), (vec![0], vec![4]), (vec![3, 4], vec![])] {
            let lp = ev.project_l1(&eq, &strict).unwrap().unwrap();
            let cuts = ev.project_l1_cuts(&eq, &strict).unwrap().unwrap();
            assert!((lp.loss - cuts.loss).abs() < 1e-7 * (1.0 + lp.loss), "{eq:?}: {} vs {}", lp.loss, cuts.loss);
            assert!(p.region.contains(&cuts.z, 1e-7));
        }
        assert!(ev.project_l1_cuts(&[0, 1, 2, 3], &[]).unwrap().is_none());
    }

    #[test]
    fn squared_face_and_bounds() {
        let p = InverseProblem::new(triangle(), ObservationSummary::from_points(&[vec![0.6, 0.6]], true).unwrap());
        let mut ev = Evaluator::new(&p, 1e-4).unwrap();
        let f = ev.project(&[0], &[]).unwrap().unwrap();
        assert!((f.loss - 0.36).abs() < 1e-12);
        assert!((ev.affine_bound(&[0]).unwrap() - 0.36).abs() < 1e-12);
        assert!(ev.project(&[0, 1, 2], &[]).unwrap().is_none());
        assert!(ev.project(&[0], &[1, 2]).unwrap().is_some());
        assert_eq!(ev.stats.projections, 3);
        ev.project(&[0], &[]).unwrap();
        assert_eq!(ev.stats.projections, 3);
    }
}
