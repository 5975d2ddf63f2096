//! Euclidean projection onto `{z : E z = f, G z ≥ h}` by a primal active-set
//! method started from a phase-one vertex.

use serde::{Deserialize, Serialize};

use super::linalg::{axpy, dot, norm2, norm_inf, orthonormalize, solve_pivoted, DenseMatrix};
use super::lp::{solve_lp_with, LpOptions, LpSpec, LpStatus};
use super::{InfeasibilityCertificate, NumericError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub target: Vec<f64>,
    pub eq_matrix: DenseMatrix,
    pub eq_rhs: Vec<f64>,
    pub ineq_matrix: DenseMatrix,
    pub ineq_rhs: Vec<f64>,
}

impl ProjectionSpec {
    pub fn new(target: Vec<f64>) -> Self {
        let n = target.len();
        Self {
            target,
            eq_matrix: DenseMatrix::zeros(0, n),
            eq_rhs: Vec::new(),
            ineq_matrix: DenseMatrix::zeros(0, n),
            ineq_rhs: Vec::new(),
        }
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) -> Result<(), NumericError> {
        self.eq_matrix.push_row(row)?;
        self.eq_rhs.push(rhs);
        Ok(())
    }

    pub fn push_ineq(&mut self, row: &[f64], rhs: f64) -> Result<(), NumericError> {
        self.ineq_matrix.push_row(row)?;
        self.ineq_rhs.push(rhs);
        Ok(())
    }

    fn validate(&self) -> Result<(), NumericError> {
        let n = self.target.len();
        let dims = [
            ("equality matrix columns", n, self.eq_matrix.cols()),
            ("equality right-hand side", self.eq_matrix.rows(), self.eq_rhs.len()),
            ("inequality matrix columns", n, self.ineq_matrix.cols()),
            ("inequality right-hand side", self.ineq_matrix.rows(), self.ineq_rhs.len()),
        ];
        for (context, expected, found) in dims {
            if expected != found {
                return Err(NumericError::Dimension { context, expected, found });
            }
        }
        if self.target.iter().chain(&self.eq_rhs).chain(&self.ineq_rhs).any(|v| !v.is_finite()) {
            return Err(NumericError::NonFinite("projection data"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub point: Vec<f64>,
    /// Inequality rows with `|g_iᵀz − h_i| ≤ tol`.
    pub active: Vec<usize>,
    pub sq_distance: f64,
    /// KKT multiplier per inequality row (zero off the final working set).
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    pub tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: None }
    }
}

pub fn project_point(spec: &ProjectionSpec) -> Result<Projection, NumericError> {
    project_point_with(spec, &ProjectionOptions::default())
}

pub fn project_point_with(spec: &ProjectionSpec, opts: &ProjectionOptions) -> Result<Projection, NumericError> {
    spec.validate()?;
    let n = spec.target.len();
    let tol = opts.tol;

    // Unit-normalized copies; zero rows are checked and dropped.
    let mut eq_rows: Vec<Vec<f64>> = Vec::new();
    let mut eq_rhs = Vec::new();
    for (row, &f) in spec.eq_matrix.row_iter().zip(&spec.eq_rhs) {
        let s = norm2(row);
        if s == 0.0 {
            if f.abs() > tol {
                return Err(zero_row_certificate(spec, f.abs()));
            }
            continue;
        }
        eq_rows.push(row.iter().map(|v| v / s).collect());
        eq_rhs.push(f / s);
    }
    let mut g_rows: Vec<Vec<f64>> = Vec::new();
    let mut g_rhs = Vec::new();
    let mut g_index = Vec::new();
    let mut g_scale = Vec::new();
    for (i, (row, &h)) in spec.ineq_matrix.row_iter().zip(&spec.ineq_rhs).enumerate() {
        let s = norm2(row);
        if s == 0.0 {
            if h > tol {
                return Err(zero_row_certificate(spec, h));
            }
            continue;
        }
        g_rows.push(row.iter().map(|v| v / s).collect());
        g_rhs.push(h / s);
        g_index.push(i);
        g_scale.push(s);
    }

    let c = &spec.target;
    let feasible_target = eq_rows.is_empty() && g_rows.iter().zip(&g_rhs).all(|(g, &h)| dot(g, c) >= h - 1e-12);
    let mut z = if feasible_target { c.clone() } else { phase_one(n, &eq_rows, &eq_rhs, &g_rows, &g_rhs, tol, spec)? };

    let mut basis = orthonormalize(eq_rows.clone(), 1e-10);
    let mut working: Vec<usize> = Vec::new();
    for (k, (g, &h)) in g_rows.iter().zip(&g_rhs).enumerate() {
        if (dot(g, &z) - h).abs() <= 1e-9 {
            let mut r = g.clone();
            for q in &basis {
                let p = dot(q, &r);
                axpy(&mut r, -p, q);
            }
            let nr = norm2(&r);
            if nr > 1e-8 {
                r.iter_mut().for_each(|v| *v /= nr);
                basis.push(r);
                working.push(k);
            }
        }
    }

    let max_iter = opts.max_iter.unwrap_or(50 * (n + g_rows.len() + 10));
    let mut iter = 0;
    let mut stalled = false;
    let lambda_w: Vec<f64> = loop {
        iter += 1;
        if iter > max_iter {
            return Err(NumericError::IterationLimit(max_iter));
        }
        let crow: Vec<&[f64]> = eq_rows.iter().map(Vec::as_slice).chain(working.iter().map(|&k| g_rows[k].as_slice())).collect();
        let v: Vec<f64> = c.iter().zip(&z).map(|(a, b)| a - b).collect();
        let k = crow.len();
        let mut gram = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            for j in 0..=i {
                let g = dot(crow[i], crow[j]);
                gram[i * k + j] = g;
                gram[j * k + i] = g;
            }
            rhs[i] = dot(crow[i], &v);
        }
        let mut p = v.clone();
        for _ in 0..2 {
            for q in &orthonormalize(crow.iter().map(|r| r.to_vec()).collect(), 1e-10) {
                let d = dot(q, &p);
                axpy(&mut p, -d, q);
            }
        }
        let vscale = 1.0 + norm_inf(&v) + norm_inf(&z);
        if norm_inf(&p) <= 1e-12 * vscale {
            let (mu, _) = solve_pivoted(&gram, &rhs, 1e-11);
            let ne = eq_rows.len();
            let lambda_w: Vec<f64> = working.iter().enumerate().map(|(w, _)| -mu[ne + w]).collect();
            // After a zero-length step, drop the lowest index to avoid cycling.
            let mut negative = lambda_w.iter().enumerate().filter(|(_, &l)| l < -1e-10 * vscale);
            let drop = if stalled {
                negative.next()
            } else {
                negative.min_by(|a, b| a.1.total_cmp(b.1).then(working[a.0].cmp(&working[b.0])))
            };
            match drop {
                Some((w, _)) => {
                    working.remove(w);
                }
                None => break lambda_w,
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut blocking: Option<usize> = None;
        for (kk, (g, &h)) in g_rows.iter().zip(&g_rhs).enumerate() {
            if working.contains(&kk) {
                continue;
            }
            let gp = dot(g, &p);
            if gp >= -1e-14 * (1.0 + norm_inf(&p)) {
                continue;
            }
            let slack = (dot(g, &z) - h).max(0.0);
            let a = slack / -gp;
            if a < alpha || (a == alpha && blocking.is_some_and(|b| kk < b)) {
                alpha = a;
                blocking = Some(kk);
            }
        }
        stalled = alpha <= 0.0;
        axpy(&mut z, alpha, &p);
        if let Some(b) = blocking {
            let pos = working.partition_point(|&w| w < b);
            working.insert(pos, b);
        }
    };

    let mut multipliers = vec![0.0; spec.ineq_matrix.rows()];
    for (w, &k) in working.iter().enumerate() {
        multipliers[g_index[k]] = lambda_w.get(w).copied().unwrap_or(0.0).max(0.0) / g_scale[k];
    }
    let active = spec
        .ineq_matrix
        .row_iter()
        .zip(&spec.ineq_rhs)
        .enumerate()
        .filter(|(_, (g, &h))| (dot(g, &z) - h).abs() <= tol)
        .map(|(i, _)| i)
        .collect();
    let sq_distance = z.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(Projection { point: z, active, sq_distance, multipliers })
}

fn zero_row_certificate(spec: &ProjectionSpec, residual: f64) -> NumericError {
    NumericError::Infeasible(InfeasibilityCertificate {
        residual,
        eq_weights: vec![0.0; spec.eq_rhs.len()],
        ineq_weights: vec![0.0; spec.ineq_rhs.len()],
    })
}

fn phase_one(
    n: usize,
    eq_rows: &[Vec<f64>],
    eq_rhs: &[f64],
    g_rows: &[Vec<f64>],
    g_rhs: &[f64],
    tol: f64,
    spec: &ProjectionSpec,
) -> Result<Vec<f64>, NumericError> {
    let mut lp = LpSpec::feasibility(n);
    for (r, &f) in eq_rows.iter().zip(eq_rhs) {
        lp.push_eq(r, f)?;
    }
    for (r, &h) in g_rows.iter().zip(g_rhs) {
        lp.push_ineq(r, h)?;
    }
    let out = solve_lp_with(&lp, &LpOptions { tol, ..LpOptions::default() })?;
    match out.status {
        LpStatus::Optimal => Ok(out.x),
        _ => {
            let cert = out.certificate.unwrap_or(InfeasibilityCertificate {
                residual: f64::NAN,
                eq_weights: Vec::new(),
                ineq_weights: Vec::new(),
            });
            // Report weights against the caller's rows, not the normalized copies.
            let mut eq_weights = vec![0.0; spec.eq_rhs.len()];
            let mut k = 0;
            for (i, row) in spec.eq_matrix.row_iter().enumerate() {
                let s = norm2(row);
                if s > 0.0 {
                    eq_weights[i] = cert.eq_weights.get(k).copied().unwrap_or(0.0) / s;
                    k += 1;
                }
            }
            let mut ineq_weights = vec![0.0; spec.ineq_rhs.len()];
            let mut k = 0;
            for (i, row) in spec.ineq_matrix.row_iter().enumerate() {
                let s = norm2(row);
                if s > 0.0 {
                    ineq_weights[i] = cert.ineq_weights.get(k).copied().unwrap_or(0.0) / s;
                    k += 1;
                }
            }
            Err(NumericError::Infeasible(InfeasibilityCertificate { residual: cert.residual, eq_weights, ineq_weights }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_projection() {
        let mut s = ProjectionSpec::new(vec![2.0, 2.0]);
        s.push_eq(&[1.0, 0.0], 0.0).unwrap();
        s.push_ineq(&[1.0, 0.0], 0.0).unwrap();
        s.push_ineq(&[0.0, 1.0], 0.0).unwrap();
        let p = project_point(&s).unwrap();
        assert!((p.point[0]).abs() < 1e-12 && (p.point[1] - 2.0).abs() < 1e-12);
        assert!((p.sq_distance - 4.0).abs() < 1e-12);
        assert_eq!(p.active, vec![0]);
    }

    #[test]
    fn segment_projection_matches_grid_search() {
        let mut s = ProjectionSpec::new(vec![0.6, 0.6]);
        s.push_eq(&[1.0, 0.0], 0.0).unwrap();
        s.push_ineq(&[0.0, 1.0], 0.0).unwrap();
        s.push_ineq(&[-1.0, -1.0], -1.0).unwrap();
        let p = project_point(&s).unwrap();
        assert!((p.sq_distance - 0.36).abs() < 1e-12);
        // Grid oracle over the feasible segment {0} × [0, 1].
        let best = (0..=10_000)
            .map(|k| k as f64 / 10_000.0)
            .map(|y| 0.36 + (y - 0.6) * (y - 0.6))
            .fold(f64::INFINITY, f64::min);
        assert!((p.sq_distance - best).abs() < 1e-8);
        assert!((p.point[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_equalities() {
        let mut s = ProjectionSpec::new(vec![0.0, 0.0]);
        s.push_eq(&[1.0, 0.0], 0.0).unwrap();
        s.push_eq(&[1.0, 0.0], 1.0).unwrap();
        assert!(matches!(project_point(&s), Err(NumericError::Infeasible(_))));
    }

    #[test]
    fn corner_projection_has_positive_multipliers() {
        let mut s = ProjectionSpec::new(vec![-1.0, -2.0]);
        s.push_ineq(&[1.0, 0.0], 0.0).unwrap();
        s.push_ineq(&[0.0, 1.0], 0.0).unwrap();
        let p = project_point(&s).unwrap();
        assert!(p.point.iter().all(|v| v.abs() < 1e-12));
        assert!((p.multipliers[0] - 1.0).abs() < 1e-9 && (p.multipliers[1] - 2.0).abs() < 1e-9);
    }
}
