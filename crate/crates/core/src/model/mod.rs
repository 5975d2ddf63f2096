//! Forward/inverse problem data: region, constraint hierarchy, observations
//! and parameter normalization.

pub mod document;
pub mod observations;
pub mod region;

use serde::{Deserialize, Serialize};

pub use document::{ObservationsDoc, ProblemDocument, RegionDoc, TrackedQuantity};
pub use observations::{componentwise_median, LossKind, ObservationSummary};
pub use region::{PolyhedralRegion, RowClass};

use crate::numeric::{LpSpec, NumericError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension { context: &'static str, expected: usize, found: usize },
    #[error("region has no rows")]
    EmptyRegion,
    #[error("row {0} has an all-zero normal")]
    ZeroRow(usize),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("row index {index} out of range for {m} rows")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("invalid document: {0}")]
    Document(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Relevant rows `R`, preferred rows `P ⊆ R`; everything else is trivial.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConstraintHierarchy {
    relevant: Vec<usize>,
    #[serde(default)]
    preferred: Vec<usize>,
}

impl ConstraintHierarchy {
    pub fn new(mut relevant: Vec<usize>, mut preferred: Vec<usize>) -> Self {
        relevant.sort_unstable();
        relevant.dedup();
        preferred.sort_unstable();
        preferred.dedup();
        Self { relevant, preferred }
    }

    /// Every row relevant, none preferred.
    pub fn all_relevant(m: usize) -> Self {
        Self::new((0..m).collect(), Vec::new())
    }

    /// Rows labelled structural are relevant; box rows are trivial.
    pub fn from_labels(labels: &[RowClass]) -> Self {
        Self::new(labels.iter().enumerate().filter(|(_, l)| **l == RowClass::Structural).map(|(i, _)| i).collect(), Vec::new())
    }

    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    pub fn preferred(&self) -> &[usize] {
        &self.preferred
    }

    pub fn is_relevant(&self, i: usize) -> bool {
        self.relevant.binary_search(&i).is_ok()
    }

    pub fn is_preferred(&self, i: usize) -> bool {
        self.preferred.binary_search(&i).is_ok()
    }

    pub fn trivial(&self, m: usize) -> Vec<usize> {
        (0..m).filter(|i| !self.is_relevant(*i)).collect()
    }

    pub fn with_preferred(&self, preferred: Vec<usize>) -> Self {
        Self::new(self.relevant.clone(), preferred)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub index: usize,
    pub floor: f64,
}

/// `Θ = {θ ≥ 0, 1ᵀθ = 1}`, optionally with `θ_{j₀} ≥ α`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizationSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Anchor>,
}

impl NormalizationSet {
    pub fn simplex() -> Self {
        Self::default()
    }

    /// Appends the Θ constraints for `θ = M v`, where `theta_rows[j]` is row `j`
    /// of `M` over the LP's variables `v`.
    pub fn push_constraints(&self, lp: &mut LpSpec, theta_rows: &[Vec<f64>]) -> Result<(), NumericError> {
        let nv = lp.n();
        let mut sum = vec![0.0; nv];
        for row in theta_rows {
            lp.push_ineq(row, 0.0)?;
            sum.iter_mut().zip(row).for_each(|(s, r)| *s += r);
        }
        lp.push_eq(&sum, 1.0)?;
        if let Some(a) = self.anchor {
            lp.push_ineq(&theta_rows[a.index], a.floor)?;
        }
        Ok(())
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        theta.iter().all(|&t| t >= -tol)
            && (theta.iter().sum::<f64>() - 1.0).abs() <= tol
            && self.anchor.is_none_or(|a| theta[a.index] >= a.floor - tol)
    }
}

/// A validation outcome: a stable machine-readable code and a message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: String,
    pub message: String,
}

impl Finding {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Self { code: code.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseProblem {
    pub region: PolyhedralRegion,
    pub hierarchy: ConstraintHierarchy,
    pub observations: ObservationSummary,
    pub loss: LossKind,
    pub normalization: NormalizationSet,
}

impl InverseProblem {
    pub fn new(region: PolyhedralRegion, observations: ObservationSummary) -> Self {
        let hierarchy = ConstraintHierarchy::all_relevant(region.m());
        Self { region, hierarchy, observations, loss: LossKind::Squared, normalization: NormalizationSet::simplex() }
    }

    pub fn with_hierarchy(mut self, hierarchy: ConstraintHierarchy) -> Self {
        self.hierarchy = hierarchy;
        self
    }

    pub fn with_loss(mut self, loss: LossKind) -> Self {
        self.loss = loss;
        self
    }

    pub fn n(&self) -> usize {
        self.region.n()
    }

    pub fn m(&self) -> usize {
        self.region.m()
    }

    pub fn total_loss(&self, z: &[f64]) -> Result<f64, ModelError> {
        self.observations.total_loss(z, self.loss)
    }

    /// Empty iff every invariant holds and the region is nonempty.
    pub fn validate(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        let (n, m) = (self.n(), self.m());
        if self.observations.dim() != n {
            out.push(Finding::new(
                "dimension_mismatch",
                format!("observations have dimension {} but the region has {n}", self.observations.dim()),
            ));
        }
        for &i in self.hierarchy.relevant().iter().chain(self.hierarchy.preferred()) {
            if i >= m {
                out.push(Finding::new("index_out_of_range", format!("row index {i} out of range for {m} rows")));
            }
        }
        if self.hierarchy.preferred().iter().any(|&p| !self.hierarchy.is_relevant(p)) {
            out.push(Finding::new("preferred_not_subset", "preferred not subset of relevant"));
        }
        if let Some(a) = self.normalization.anchor {
            if a.index >= n || !(0.0..1.0).contains(&a.floor) {
                out.push(Finding::new("invalid_anchor", "normalization anchor needs an index below n and 0 ≤ α < 1"));
            }
        }
        if self.observations.count() == 0 {
            out.push(Finding::new("empty_observations", "no observations"));
        }
        if self.loss == LossKind::L1 && self.observations.points().is_none() && self.observations.median().is_none() {
            out.push(Finding::new("l1_requires_points", "l1 loss requires retained points or a median"));
        }
        match self.region.feasible_point(1e-7) {
            Ok(Some(_)) => {}
            Ok(None) => out.push(Finding::new("region_infeasible", "region infeasible")),
            Err(e) => out.push(Finding::new("numeric", e.to_string())),
        }
        out
    }
}
