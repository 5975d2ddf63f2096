//! Dense linear algebra, a bounded two-phase simplex method and an active-set
//! projection solver.

pub mod linalg;
pub mod lp;
pub mod lpfile;
pub mod projection;

use serde::{Deserialize, Serialize};

pub use linalg::{is_positive_definite, null_space, rank, DenseMatrix};
pub use lp::{solve_lp, solve_lp_with, LpOptions, LpOutcome, LpSpec, LpStatus, VarBound};
pub use projection::{project_point, project_point_with, Projection, ProjectionOptions, ProjectionSpec};

/// Evidence attached to an infeasible system: the smallest total violation that
/// phase one could reach and the row weights of its final dual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub residual: f64,
    pub eq_weights: Vec<f64>,
    pub ineq_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension { context: &'static str, expected: usize, found: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("variable {0} has its lower bound above its upper bound")]
    InvalidBounds(usize),
    #[error("matrix is not symmetric")]
    Asymmetric,
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("constraint system is infeasible (phase-one residual {:.3e})", .0.residual)]
    Infeasible(InfeasibilityCertificate),
}

/// Feasibility/activity tolerance and the relative rank threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feasibility: f64,
    pub rank_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { feasibility: 1e-7, rank_rel: 1e-9 }
    }
}
