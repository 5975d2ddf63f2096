//! IL, GIL and MGIL by combinatorial search over activation patterns, the
//! sequential tradeoff loop, and the classical ILO baseline.

mod baseline;
mod face;
mod gil;
mod il;
mod milp;
mod mgil;
mod oracle;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use baseline::{solve_ilo_baseline, BaselineSolution};
pub use gil::solve_gil;
pub use il::{solve_il, solve_il_with};
pub use milp::gil_milp_model;
pub use mgil::{check_trace, initial_step, run_mgil, solve_mgil_step, MgilConfig, StepRecord, Termination, TradeoffTrace};
pub use oracle::{brute_force_gil_oracle, brute_force_oracle};

use crate::geometry::{GeometryError, ParameterPolytope};
use crate::model::{Finding, InverseProblem, ModelError, PolyhedralRegion};
use crate::numeric::NumericError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid problem: {}", .0.iter().map(|f| f.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Finding>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no rationalizable solution")]
    NotRationalizable,
    #[error("no realizable subset of {r} relevant constraints; blocking constraints {blocking:?}")]
    Realizability { r: usize, blocking: Vec<usize> },
    #[error("no feasible augmentation of the active face")]
    FaceExhausted,
    #[error("oracle limited to n ≤ {max_n} and m ≤ {max_m}")]
    SizeLimit { max_n: usize, max_m: usize },
    #[error("baseline needs retained observation points")]
    NeedsPoints,
    #[error("no candidate parameter")]
    NoCandidate,
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SolveError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Invalid(_) => "invalid_problem",
            Self::Config(_) => "invalid_config",
            Self::NotRationalizable => "not_rationalizable",
            Self::Realizability { .. } => "not_realizable",
            Self::FaceExhausted => "face_exhausted",
            Self::SizeLimit { .. } => "size_limit",
            Self::NeedsPoints => "needs_points",
            Self::NoCandidate => "no_candidate",
            Self::Numeric(_) | Self::Geometry(_) | Self::Model(_) => "numeric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exhaustive,
    #[default]
    BestFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub patterns: usize,
    pub pruned: usize,
    pub projections: usize,
    pub cone_checks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IlSolution {
    pub point: Vec<f64>,
    pub loss: f64,
    /// Every row tight at `point`.
    pub active: Vec<usize>,
    /// The relevant rows forced to equality (GIL/MGIL only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    pub score: f64,
    pub theta: Vec<f64>,
    pub polytope: ParameterPolytope,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GilConfig {
    pub r: usize,
    pub omega: f64,
    /// Strict slack for inactive relevant rows; `None` picks the default.
    pub epsilon: Option<f64>,
    pub mode: SearchMode,
}

impl GilConfig {
    pub fn new(r: usize) -> Self {
        Self { r, omega: 1.0, epsilon: None, mode: SearchMode::BestFirst }
    }
}

/// `1e-4 · (1 + max|b_i|)`.
pub fn default_epsilon(region: &PolyhedralRegion) -> f64 {
    1e-4 * (1.0 + region.b().iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Tolerance for calling a row tight at a solver output.
pub fn tight_tol(region: &PolyhedralRegion) -> f64 {
    1e-7 * (1.0 + region.b().iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

pub(crate) fn tie_tol(score: f64) -> f64 {
    1e-9 * (1.0 + score.abs())
}

/// A scored candidate with its deterministic tie key.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub z: Vec<f64>,
    pub loss: f64,
    pub score: f64,
    pub key: Vec<Vec<usize>>,
    pub subset: Option<Vec<usize>>,
}

impl Candidate {
    /// Strictly preferable to `other`: lower score beyond the tie tolerance,
    /// or tied with a lexicographically smaller key.
    pub fn beats(&self, other: &Candidate) -> bool {
        let tol = tie_tol(other.score);
        if self.score < other.score - tol {
            return true;
        }
        if self.score > other.score + tol {
            return false;
        }
        self.key.cmp(&other.key) == Ordering::Less
    }
}

pub(crate) fn offer(best: &mut Option<Candidate>, cand: Candidate) {
    if best.as_ref().is_none_or(|b| cand.beats(b)) {
        *best = Some(cand);
    }
}

/// True when a lower bound cannot reach the incumbent.
pub(crate) fn dominated(lb: f64, best: &Option<Candidate>) -> bool {
    best.as_ref().is_some_and(|b| lb > b.score + tie_tol(b.score))
}

pub(crate) fn validate(problem: &InverseProblem) -> Result<(), SolveError> {
    let findings = problem.validate();
    if findings.is_empty() {
        Ok(())
    } else {
        Err(SolveError::Invalid(findings))
    }
}

pub(crate) fn finish(problem: &InverseProblem, cand: Candidate, stats: SearchStats) -> Result<IlSolution, SolveError> {
    let tol = tight_tol(&problem.region);
    let active = problem.region.tight_rows(&cand.z, tol);
    let polytope = ParameterPolytope::from_active(&problem.region, active.clone(), problem.normalization)?;
    let theta = polytope.observation_aligned(problem.observations.centroid())?;
    Ok(IlSolution {
        point: cand.z,
        loss: cand.loss,
        active,
        subset: cand.subset,
        score: cand.score,
        theta,
        polytope,
        stats,
    })
}

/// Calls `f` on every `k`-subset of `items` in lexicographic order.
pub(crate) fn for_each_combination<E>(items: &[usize], k: usize, f: &mut impl FnMut(&[usize]) -> Result<(), E>) -> Result<(), E> {
    fn rec<E>(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> Result<(), E>) -> Result<(), E> {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f)?;
            cur.pop();
        }
        Ok(())
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f)
}
