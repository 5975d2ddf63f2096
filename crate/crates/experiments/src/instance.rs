use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use invlearn_core::geometry::{cone_contains, cone_meets_normalization, generators, ParameterPolytope};
use invlearn_core::model::{
    ConstraintHierarchy, InverseProblem, NormalizationSet, ObservationSummary, PolyhedralRegion, RowClass,
};
use invlearn_core::numeric::linalg::{dist2, dot};
use invlearn_core::numeric::{solve_lp, DenseMatrix, LpStatus};

use crate::ExperimentError;

/// Half-width of the variable box.
pub const BOX: f64 = 10.0;
const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    IlAssumption,
    IoAssumption,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::IlAssumption => "il-assumption",
            Self::IoAssumption => "io-assumption",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub n: usize,
    /// Number of relevant (structural) rows.
    pub relevant: usize,
    pub scenario: Scenario,
    /// Rows binding at `x*` (il-assumption only).
    pub binding: usize,
    /// Noise standard deviation as a fraction of the box diameter.
    pub noise: f64,
    pub k_min: usize,
    pub k_max: usize,
    /// Truly binding rows disclosed as preferred.
    pub knowledge: usize,
}

impl InstanceSpec {
    pub fn new(seed: u64, n: usize, scenario: Scenario) -> Self {
        Self { seed, n, relevant: 2 * n, scenario, binding: 1, noise: 0.0, k_min: 2, k_max: 8, knowledge: 0 }
    }

    /// Per-coordinate noise standard deviation, `noise · 20√n`.
    pub fn sigma(&self) -> f64 {
        self.noise * 2.0 * BOX * (self.n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |msg: String| Err(ExperimentError::Spec(msg));
        if self.n == 0 {
            return fail("dimension must be positive".into());
        }
        if self.binding == 0 || self.binding > self.n {
            return fail(format!("binding level {} outside 1..={}", self.binding, self.n));
        }
        if self.relevant < self.binding {
            return fail(format!("{} relevant rows cannot bind {}", self.relevant, self.binding));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return fail(format!("noise fraction {} must be nonnegative", self.noise));
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return fail(format!("observation count range [{}, {}] is empty", self.k_min, self.k_max));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedInstance {
    pub spec: InstanceSpec,
    pub problem: InverseProblem,
    /// `x*`, or one `x*_k` per observation.
    pub truth: Vec<Vec<f64>>,
    pub theta_star: Vec<f64>,
    /// Relevant rows binding at the truth.
    pub binding: Vec<usize>,
}

impl GeneratedInstance {
    /// The point distances are measured to: `x*` or the mean of the `x*_k`.
    pub fn target(&self) -> Vec<f64> {
        let n = self.problem.n();
        let mut t = vec![0.0; n];
        for x in &self.truth {
            t.iter_mut().zip(x).for_each(|(a, b)| *a += b / self.truth.len() as f64);
        }
        t
    }

    pub fn distance(&self, z: &[f64]) -> f64 {
        dist2(z, &self.target()).sqrt()
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    Distribution::<f64>::sample(&StandardNormal, rng)
}

fn dirichlet(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| Distribution::<f64>::sample(&Exp1, rng)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Relevant rows with folded unit Gaussian normals pass through `anchor`
/// when listed in `tight` and cut below it otherwise, so `anchor + δ·1` is
/// strictly interior for small `δ`. Box rows follow as trivial.
fn draw_region(rng: &mut ChaCha8Rng, anchor: &[f64], relevant: usize, tight: &[usize]) -> Result<PolyhedralRegion, ExperimentError> {
    let n = anchor.len();
    let mut rows = Vec::with_capacity(relevant + 2 * n);
    let mut b = Vec::with_capacity(relevant + 2 * n);
    let mut names = Vec::with_capacity(relevant + 2 * n);
    while rows.len() < relevant {
        let g: Vec<f64> = (0..n).map(|_| gaussian(rng).abs()).collect();
        let norm = dot(&g, &g).sqrt();
        if norm < 1e-3 {
            continue;
        }
        let a: Vec<f64> = g.iter().map(|v| v / norm).collect();
        let gap = if tight.contains(&rows.len()) { 0.0 } else { rng.random_range(0.5..4.0) };
        b.push(dot(&a, anchor) - gap);
        rows.push(a);
        names.push(format!("c{}", rows.len()));
    }
    for j in 0..n {
        for (sign, tag) in [(1.0, "lo"), (-1.0, "hi")] {
            let mut e = vec![0.0; n];
            e[j] = sign;
            rows.push(e);
            b.push(-BOX);
            names.push(format!("{tag}{}", j + 1));
        }
    }
    let mut labels = vec![RowClass::Structural; relevant];
    labels.resize(relevant + 2 * n, RowClass::Box);
    Ok(PolyhedralRegion::with_names(DenseMatrix::from_rows(n, &rows)?, b, labels, names)?)
}

fn uniform_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-BOX / 2.0..BOX / 2.0)).collect()
}

fn scale_tol(region: &PolyhedralRegion) -> f64 {
    1e-7 * (1.0 + region.b().iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// A vertex of `Ω ∩ {cutᵀx ≥ level}` minimizing `wᵀx`.
fn face_vertex(region: &PolyhedralRegion, cut: &[f64], level: f64, w: &[f64]) -> Result<Option<Vec<f64>>, ExperimentError> {
    let mut lp = region.forward_lp(w);
    lp.push_ineq(cut, level)?;
    let out = solve_lp(&lp)?;
    Ok(out.is_optimal().then_some(out.x))
}

struct Truth {
    region: PolyhedralRegion,
    points: Vec<Vec<f64>>,
    theta: Vec<f64>,
    binding: Vec<usize>,
}

fn il_truth(rng: &mut ChaCha8Rng, spec: &InstanceSpec, k: usize) -> Result<Option<Truth>, ExperimentError> {
    let x = uniform_point(rng, spec.n);
    let mut s = sample(rng, spec.relevant, spec.binding).into_vec();
    s.sort_unstable();
    let region = draw_region(rng, &x, spec.relevant, &s)?;
    let norm = NormalizationSet::simplex();
    if region.tight_rows(&x, scale_tol(&region)) != s || cone_meets_normalization(&generators(&region, &s), &norm)?.is_none() {
        return Ok(None);
    }
    let pp = ParameterPolytope::from_active(&region, s.clone(), norm)?;
    let theta = pp.sample(rng, 1)?.remove(0);
    Ok(Some(Truth { region, points: vec![x; k], theta, binding: s }))
}

fn io_truth(rng: &mut ChaCha8Rng, spec: &InstanceSpec, k: usize) -> Result<Option<Truth>, ExperimentError> {
    let x0 = uniform_point(rng, spec.n);
    let region = draw_region(rng, &x0, spec.relevant, &[])?;
    let tol = scale_tol(&region);
    let theta = dirichlet(rng, spec.n);
    let fwd = solve_lp(&region.forward_lp(&theta))?;
    if fwd.status != LpStatus::Optimal {
        return Ok(None);
    }
    let cut: Vec<f64> = theta.iter().map(|t| -t).collect();
    let level = -fwd.objective - 1e-9 * (1.0 + fwd.objective.abs());
    let mut vertices = vec![fwd.x.clone()];
    for _ in 0..2 * spec.n {
        let w: Vec<f64> = (0..spec.n).map(|_| gaussian(rng)).collect();
        if let Some(v) = face_vertex(&region, &cut, level, &w)? {
            if !vertices.iter().any(|u| dist2(u, &v) < 1e-14) {
                vertices.push(v);
            }
        }
    }
    let points: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let wts = dirichlet(rng, vertices.len());
            let mut x = vec![0.0; spec.n];
            for (v, w) in vertices.iter().zip(&wts) {
                x.iter_mut().zip(v).for_each(|(a, b)| *a += w * b);
            }
            x
        })
        .collect();
    let binding: Vec<usize> =
        (0..spec.relevant).filter(|&i| points.iter().all(|x| region.slack(i, x).abs() <= tol)).collect();
    Ok(Some(Truth { region, points, theta, binding }))
}

/// Deterministic in `spec.seed`.
pub fn generate_instance(spec: &InstanceSpec) -> Result<GeneratedInstance, ExperimentError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = rng.random_range(spec.k_min..=spec.k_max);
    let mut truth = None;
    for _ in 0..MAX_REDRAWS {
        truth = match spec.scenario {
            Scenario::IlAssumption => il_truth(&mut rng, spec, k)?,
            Scenario::IoAssumption => io_truth(&mut rng, spec, k)?,
        };
        if truth.is_some() {
            break;
        }
    }
    let Truth { region, points, theta, binding } = truth.ok_or(ExperimentError::RetriesExhausted(MAX_REDRAWS))?;
    let sigma = spec.sigma();
    let observed: Vec<Vec<f64>> =
        points.iter().map(|x| x.iter().map(|v| v + sigma * gaussian(&mut rng)).collect()).collect();
    let disclosed = spec.knowledge.min(binding.len());
    let preferred: Vec<usize> = sample(&mut rng, binding.len(), disclosed).into_iter().map(|j| binding[j]).collect();
    let hierarchy = ConstraintHierarchy::new((0..spec.relevant).collect(), preferred);
    let problem =
        InverseProblem::new(region, ObservationSummary::from_points(&observed, true)?).with_hierarchy(hierarchy);
    Ok(GeneratedInstance { spec: spec.clone(), problem, truth: points, theta_star: theta, binding })
}

/// Whether `θ*` lies in the cone of the rows active at `z`. Infeasible or
/// interior points recover nothing.
pub fn evaluate_recovery(instance: &GeneratedInstance, z: &[f64]) -> bool {
    let region = &instance.problem.region;
    let tol = 10.0 * scale_tol(region);
    if region.max_violation(z) > tol {
        return false;
    }
    let active = region.tight_rows(z, tol);
    !active.is_empty() && cone_contains(&generators(region, &active), &instance.theta_star).unwrap_or(false)
}
