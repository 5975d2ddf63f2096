//! Active sets, normal cones and the identifiability diagnostics built on them.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{NormalizationSet, PolyhedralRegion};
use crate::numeric::linalg::{dot, norm2, orthonormalize, rank, DenseMatrix};
use crate::numeric::{
    is_positive_definite, null_space, project_point, solve_lp, LpSpec, LpStatus, NumericError, ProjectionSpec, VarBound,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension { context: &'static str, expected: usize, found: usize },
    #[error("no generators supplied")]
    NoGenerators,
    #[error("point violates the region by {violation:.3e}")]
    InfeasiblePoint { violation: f64 },
    #[error("parameter set is empty")]
    EmptyPolytope,
    #[error("normal {index} has norm {norm}, expected 1")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub point: Vec<f64>,
    pub indices: Vec<usize>,
    pub tol: f64,
}

pub fn active_set(region: &PolyhedralRegion, z: &[f64], tol: f64) -> ActiveSet {
    ActiveSet { point: z.to_vec(), indices: region.tight_rows(z, tol), tol }
}

/// Rows of `region` at `idx`, as a generator matrix.
pub fn generators(region: &PolyhedralRegion, idx: &[usize]) -> DenseMatrix {
    region.a().select_rows(idx)
}

/// `θ_j = Σ_i λ_i a_ij` as coefficient rows over `λ`.
fn theta_rows(gens: &DenseMatrix) -> Vec<Vec<f64>> {
    gens.transpose().to_rows()
}

fn nonneg_lp(k: usize) -> LpSpec {
    LpSpec::feasibility(k).with_bounds(vec![VarBound::NONNEG; k])
}

/// True iff `θ = Σ λ_i a_i` for some `λ ≥ 0`.
pub fn cone_contains(gens: &DenseMatrix, theta: &[f64]) -> Result<bool, GeometryError> {
    if gens.rows() == 0 {
        return Err(GeometryError::NoGenerators);
    }
    if theta.len() != gens.cols() {
        return Err(GeometryError::Dimension { context: "parameter", expected: gens.cols(), found: theta.len() });
    }
    let mut lp = nonneg_lp(gens.rows());
    for (row, &t) in theta_rows(gens).iter().zip(theta) {
        lp.push_eq(row, t)?;
    }
    Ok(solve_lp(&lp)?.status == LpStatus::Optimal)
}

/// Some `θ ∈ cone(gens) ∩ Θ`, if the intersection is nonempty.
pub fn cone_meets_normalization(gens: &DenseMatrix, norm: &NormalizationSet) -> Result<Option<Vec<f64>>, GeometryError> {
    if gens.rows() == 0 {
        return Err(GeometryError::NoGenerators);
    }
    let mut lp = nonneg_lp(gens.rows());
    norm.push_constraints(&mut lp, &theta_rows(gens))?;
    let out = solve_lp(&lp)?;
    Ok((out.status == LpStatus::Optimal).then(|| gens.tr_mul_vec(&out.x)))
}

/// `Θ*(z)`: normalized parameters in the cone of the rows active at `z`,
/// as the lifted system `{θ = Σ λ_i a_i, λ ≥ 0, θ ∈ Θ}`.
#[derive(Debug)]
pub struct ParameterPolytope {
    active: Vec<usize>,
    generators: DenseMatrix,
    normalization: NormalizationSet,
    witness: Option<Vec<f64>>,
    bounds: OnceLock<Vec<(f64, f64)>>,
}

impl Clone for ParameterPolytope {
    fn clone(&self) -> Self {
        let bounds = OnceLock::new();
        if let Some(b) = self.bounds.get() {
            let _ = bounds.set(b.clone());
        }
        Self {
            active: self.active.clone(),
            generators: self.generators.clone(),
            normalization: self.normalization,
            witness: self.witness.clone(),
            bounds,
        }
    }
}

impl PartialEq for ParameterPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.active == other.active && self.generators == other.generators && self.normalization == other.normalization
    }
}

/// Serializable view of a polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeSummary {
    pub active: Vec<usize>,
    pub empty: bool,
    pub bounds: Vec<(f64, f64)>,
}

impl Serialize for ParameterPolytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.summary().serialize(s)
    }
}

impl ParameterPolytope {
    pub fn from_active(region: &PolyhedralRegion, active: Vec<usize>, normalization: NormalizationSet) -> Result<Self, GeometryError> {
        let generators = generators(region, &active);
        let witness = if active.is_empty() { None } else { cone_meets_normalization(&generators, &normalization)? };
        Ok(Self { active, generators, normalization, witness, bounds: OnceLock::new() })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn generators(&self) -> &DenseMatrix {
        &self.generators
    }

    pub fn normalization(&self) -> &NormalizationSet {
        &self.normalization
    }

    pub fn is_empty(&self) -> bool {
        self.witness.is_none()
    }

    /// Some member of the set, when nonempty.
    pub fn witness(&self) -> Option<&[f64]> {
        self.witness.as_deref()
    }

    fn lifted_lp(&self, theta_cost: &[f64]) -> Result<LpSpec, NumericError> {
        let k = self.generators.rows();
        let rows = theta_rows(&self.generators);
        let cost: Vec<f64> = (0..k).map(|i| dot(self.generators.row(i), theta_cost)).collect();
        let mut lp = LpSpec::new(cost).with_bounds(vec![VarBound::NONNEG; k]);
        self.normalization.push_constraints(&mut lp, &rows)?;
        Ok(lp)
    }

    fn optimize(&self, theta_cost: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let out = solve_lp(&self.lifted_lp(theta_cost)?)?;
        match out.status {
            LpStatus::Optimal => Ok(self.generators.tr_mul_vec(&out.x)),
            _ => Err(GeometryError::EmptyPolytope),
        }
    }

    /// Per-coordinate `[min θ_j, max θ_j]`, computed once by 2n LPs.
    pub fn bounds(&self) -> Result<&[(f64, f64)], GeometryError> {
        if self.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        if let Some(b) = self.bounds.get() {
            return Ok(b);
        }
        let n = self.generators.cols();
        let mut b = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let lo = self.optimize(&e)?[j];
            e[j] = -1.0;
            let hi = self.optimize(&e)?[j];
            b.push((lo, hi));
        }
        Ok(self.bounds.get_or_init(|| b))
    }

    pub fn summary(&self) -> PolytopeSummary {
        PolytopeSummary {
            active: self.active.clone(),
            empty: self.is_empty(),
            bounds: self.bounds().map(<[_]>::to_vec).unwrap_or_default(),
        }
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> Result<bool, GeometryError> {
        if self.active.is_empty() {
            return Ok(false);
        }
        Ok(self.normalization.contains(theta, tol) && cone_contains(&self.generators, theta)?)
    }

    /// Random members: vertices from random-objective LPs, mixed by random
    /// convex weights.
    pub fn sample<R: Rng>(&self, rng: &mut R, count: usize) -> Result<Vec<Vec<f64>>, GeometryError> {
        if self.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        let n = self.generators.cols();
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for _ in 0..count.clamp(1, 2 * n + 2) {
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            vertices.push(self.optimize(&w)?);
        }
        Ok((0..count)
            .map(|_| {
                let weights: Vec<f64> = vertices.iter().map(|_| -rng.random_range(f64::EPSILON..1.0).ln()).collect();
                let total: f64 = weights.iter().sum();
                let mut theta = vec![0.0; n];
                for (v, w) in vertices.iter().zip(&weights) {
                    theta.iter_mut().zip(v).for_each(|(t, x)| *t += w / total * x);
                }
                theta
            })
            .collect())
    }

    /// The member minimizing `θᵀx̄`; ties go to the lexicographically largest
    /// weight vector, i.e. mass on the lowest coordinates first.
    pub fn observation_aligned(&self, centroid: &[f64]) -> Result<Vec<f64>, GeometryError> {
        if self.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        let n = self.generators.cols();
        if centroid.len() != n {
            return Err(GeometryError::Dimension { context: "centroid", expected: n, found: centroid.len() });
        }
        let k = self.generators.rows();
        let rows = theta_rows(&self.generators);
        let mut lp = self.lifted_lp(centroid)?;
        let first = solve_lp(&lp)?;
        if first.status != LpStatus::Optimal {
            return Err(GeometryError::EmptyPolytope);
        }
        let mut theta = self.generators.tr_mul_vec(&first.x);
        let scale = 1.0 + centroid.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let obj_row: Vec<f64> = (0..k).map(|i| dot(self.generators.row(i), centroid)).collect();
        lp.push_ineq(&obj_row.iter().map(|v| -v).collect::<Vec<_>>(), -(first.objective + 1e-9 * scale))?;
        for j in 0..n {
            lp.objective = rows[j].iter().map(|v| -v).collect();
            let out = solve_lp(&lp)?;
            if out.status != LpStatus::Optimal {
                break;
            }
            theta = self.generators.tr_mul_vec(&out.x);
            lp.push_ineq(&rows[j], theta[j] - 1e-9)?;
        }
        Ok(theta)
    }
}

pub fn parameter_polytope(region: &PolyhedralRegion, z: &[f64], norm: &NormalizationSet, tol: f64) -> Result<ParameterPolytope, GeometryError> {
    if z.len() != region.n() {
        return Err(GeometryError::Dimension { context: "point", expected: region.n(), found: z.len() });
    }
    let violation = region.max_violation(z);
    if violation > tol {
        return Err(GeometryError::InfeasiblePoint { violation });
    }
    ParameterPolytope::from_active(region, region.tight_rows(z, tol), *norm)
}

pub fn observation_aligned_parameter(pp: &ParameterPolytope, centroid: &[f64]) -> Result<Vec<f64>, GeometryError> {
    pp.observation_aligned(centroid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum RayVerdict {
    Singleton { theta: Vec<f64> },
    Multi,
    Empty,
}

/// Classifies `C ∩ Θ` for `C = ∩_k N_Ω(z^k)` by min/max probes of each `θ_j`.
pub fn is_single_ray(points: &[Vec<f64>], region: &PolyhedralRegion, norm: &NormalizationSet, tol: f64) -> Result<RayVerdict, GeometryError> {
    let n = region.n();
    let mut actives = Vec::with_capacity(points.len());
    for z in points {
        if z.len() != n {
            return Err(GeometryError::Dimension { context: "point", expected: n, found: z.len() });
        }
        let violation = region.max_violation(z);
        if violation > tol {
            return Err(GeometryError::InfeasiblePoint { violation });
        }
        actives.push(region.tight_rows(z, tol));
    }
    let nv = n + actives.iter().map(Vec::len).sum::<usize>();
    let mut bounds = vec![VarBound::FREE; n];
    bounds.extend(std::iter::repeat_n(VarBound::NONNEG, nv - n));
    let mut lp = LpSpec::feasibility(nv).with_bounds(bounds);
    let mut offset = n;
    for act in &actives {
        for j in 0..n {
            let mut row = vec![0.0; nv];
            row[j] = 1.0;
            for (t, &i) in act.iter().enumerate() {
                row[offset + t] = -region.row(i)[j];
            }
            lp.push_eq(&row, 0.0)?;
        }
        offset += act.len();
    }
    let theta: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut r = vec![0.0; nv];
            r[j] = 1.0;
            r
        })
        .collect();
    norm.push_constraints(&mut lp, &theta)?;
    let mut mid = vec![0.0; n];
    for j in 0..n {
        lp.objective = theta[j].clone();
        let lo = solve_lp(&lp)?;
        if lo.status != LpStatus::Optimal {
            return Ok(RayVerdict::Empty);
        }
        lp.objective = theta[j].iter().map(|v| -v).collect();
        let hi = solve_lp(&lp)?;
        if (hi.x[j] - lo.x[j]).abs() > 1e-7 {
            return Ok(RayVerdict::Multi);
        }
        mid[j] = 0.5 * (hi.x[j] + lo.x[j]);
    }
    Ok(RayVerdict::Singleton { theta: mid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityReport {
    pub cone_dims: Vec<usize>,
    pub all_one_dimensional: bool,
    pub excitation: DenseMatrix,
    pub positive_definite: bool,
    pub null_space: Vec<Vec<f64>>,
    pub s_complement: DenseMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_ray: Option<RayVerdict>,
}

/// `S = Σ A_kᵀ P_k A_k` with `P_k = I − n^k n^kᵀ` (identity for interior
/// observations) and `M = Σ A_kᵀ n^k n^kᵀ A_k`. Gradient matrices default to
/// the identity.
pub fn excitation_report(gradients: Option<&[DenseMatrix]>, normals: &[Option<Vec<f64>>]) -> Result<IdentifiabilityReport, GeometryError> {
    let mut bases = Vec::with_capacity(normals.len());
    for (index, nk) in normals.iter().enumerate() {
        match nk {
            Some(v) => {
                let norm = norm2(v);
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(GeometryError::NonUnitNormal { index, norm });
                }
                bases.push(vec![v.clone()]);
            }
            None => bases.push(Vec::new()),
        }
    }
    let dims = normals.iter().map(|n| usize::from(n.is_some())).collect();
    assemble_report(gradients, &bases, dims)
}

fn assemble_report(gradients: Option<&[DenseMatrix]>, bases: &[Vec<Vec<f64>>], cone_dims: Vec<usize>) -> Result<IdentifiabilityReport, GeometryError> {
    let n = bases.iter().flatten().map(Vec::len).next().or_else(|| gradients.and_then(|g| g.first()).map(DenseMatrix::rows));
    let n = n.unwrap_or(0);
    let p = gradients.and_then(|g| g.first()).map_or(n, DenseMatrix::cols);
    if let Some(g) = gradients {
        if g.len() != bases.len() {
            return Err(GeometryError::Dimension { context: "gradient matrices", expected: bases.len(), found: g.len() });
        }
    }
    let mut s = DenseMatrix::zeros(p, p);
    let mut comp = DenseMatrix::zeros(p, p);
    for (k, basis) in bases.iter().enumerate() {
        let a = match gradients {
            Some(g) => {
                if g[k].rows() != n || g[k].cols() != p {
                    return Err(GeometryError::Dimension { context: "gradient matrix", expected: n * p, found: g[k].rows() * g[k].cols() });
                }
                g[k].clone()
            }
            None => DenseMatrix::identity(n),
        };
        // Q Qᵀ for the span of the active normals.
        let mut qq = DenseMatrix::zeros(n, n);
        for q in basis {
            if q.len() != n {
                return Err(GeometryError::Dimension { context: "normal", expected: n, found: q.len() });
            }
            for i in 0..n {
                for j in 0..n {
                    qq.set(i, j, qq.get(i, j) + q[i] * q[j]);
                }
            }
        }
        let mut proj = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                proj.set(i, j, proj.get(i, j) - qq.get(i, j));
            }
        }
        let at = a.transpose();
        s.add_assign(&at.matmul(&proj)?.matmul(&a)?)?;
        comp.add_assign(&at.matmul(&qq)?.matmul(&a)?)?;
    }
    // Symmetrize away rounding before the definiteness test.
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (s.get(i, j) + s.get(j, i));
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    let tol = 1e-9 * s.max_abs().max(1.0);
    let positive_definite = p > 0 && is_positive_definite(&s, tol)?;
    let null = if positive_definite { Vec::new() } else { null_space(&s, tol) };
    Ok(IdentifiabilityReport {
        all_one_dimensional: cone_dims.iter().all(|&d| d == 1),
        cone_dims,
        excitation: s,
        positive_definite,
        null_space: null,
        s_complement: comp,
        single_ray: None,
    })
}

/// Full report for observed points of a region: cone dimensions from the
/// active rows, `S` with the projector onto the complement of each active
/// span, and the single-ray verdict.
pub fn identifiability_report(points: &[Vec<f64>], region: &PolyhedralRegion, norm: &NormalizationSet, tol: f64) -> Result<IdentifiabilityReport, GeometryError> {
    let mut bases = Vec::with_capacity(points.len());
    let mut dims = Vec::with_capacity(points.len());
    for z in points {
        let act = region.tight_rows(z, tol);
        let g = generators(region, &act);
        dims.push(if act.is_empty() { 0 } else { rank(&g, g.default_rank_tol()) });
        bases.push(orthonormalize(g.to_rows(), 1e-9));
    }
    let mut report = if points.is_empty() {
        assemble_report(None, &[], Vec::new())?
    } else {
        let n = region.n();
        let eye: Vec<DenseMatrix> = (0..points.len()).map(|_| DenseMatrix::identity(n)).collect();
        assemble_report(Some(&eye), &bases, dims)?
    };
    report.single_ray = Some(is_single_ray(points, region, norm, tol)?);
    Ok(report)
}

/// `min_{λ ≥ 0} ‖θ − A_Iᵀλ‖` over the rows tight at `z`, computed as the norm
/// of the projection of `θ` onto the polar cone.
pub fn stationarity_residual(region: &PolyhedralRegion, z: &[f64], theta: &[f64], tol: f64) -> Result<f64, GeometryError> {
    let act = region.tight_rows(z, tol);
    if act.is_empty() {
        return Ok(norm2(theta));
    }
    let mut spec = ProjectionSpec::new(theta.to_vec());
    for &i in &act {
        let neg: Vec<f64> = region.row(i).iter().map(|v| -v).collect();
        spec.push_ineq(&neg, 0.0)?;
    }
    Ok(norm2(&project_point(&spec)?.point))
}
