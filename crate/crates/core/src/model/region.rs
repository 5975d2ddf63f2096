use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::numeric::linalg::{dot, DenseMatrix};
use crate::numeric::{solve_lp_with, LpOptions, LpSpec, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowClass {
    Structural,
    Box,
}

/// `Ω = {x : a_iᵀx ≥ b_i}` with a class label and a display name per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralRegion {
    a: DenseMatrix,
    b: Vec<f64>,
    labels: Vec<RowClass>,
    names: Vec<String>,
}

impl PolyhedralRegion {
    pub fn new(a: DenseMatrix, b: Vec<f64>, labels: Vec<RowClass>) -> Result<Self, ModelError> {
        let names = (1..=a.rows()).map(|i| format!("row{i}")).collect();
        Self::with_names(a, b, labels, names)
    }

    pub fn with_names(a: DenseMatrix, b: Vec<f64>, labels: Vec<RowClass>, names: Vec<String>) -> Result<Self, ModelError> {
        let m = a.rows();
        if m == 0 {
            return Err(ModelError::EmptyRegion);
        }
        for (context, found) in [("right-hand side", b.len()), ("row labels", labels.len()), ("row names", names.len())] {
            if found != m {
                return Err(ModelError::Dimension { context, expected: m, found });
            }
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("right-hand side"));
        }
        if let Some(i) = (0..m).find(|&i| a.row(i).iter().all(|v| *v == 0.0)) {
            return Err(ModelError::ZeroRow(i));
        }
        Ok(Self { a, b, labels, names })
    }

    /// Convenience constructor from nested rows, all labelled structural.
    pub fn from_rows(rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self, ModelError> {
        let n = rows.first().map_or(0, Vec::len);
        let a = DenseMatrix::from_rows(n, rows)?;
        let labels = vec![RowClass::Structural; rows.len()];
        Self::new(a, b, labels)
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.a.row(i)
    }

    pub fn rhs(&self, i: usize) -> f64 {
        self.b[i]
    }

    pub fn label(&self, i: usize) -> RowClass {
        self.labels[i]
    }

    pub fn labels(&self) -> &[RowClass] {
        &self.labels
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// `a_iᵀz − b_i`; negative means row `i` is violated.
    pub fn slack(&self, i: usize, z: &[f64]) -> f64 {
        dot(self.row(i), z) - self.b[i]
    }

    pub fn max_violation(&self, z: &[f64]) -> f64 {
        (0..self.m()).map(|i| -self.slack(i, z)).fold(0.0, f64::max)
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        self.max_violation(z) <= tol
    }

    /// Rows with `|a_iᵀz − b_i| ≤ tol`.
    pub fn tight_rows(&self, z: &[f64], tol: f64) -> Vec<usize> {
        (0..self.m()).filter(|&i| self.slack(i, z).abs() <= tol).collect()
    }

    /// The forward problem `min θᵀx` over the region.
    pub fn forward_lp(&self, theta: &[f64]) -> LpSpec {
        let mut lp = LpSpec::new(theta.to_vec());
        lp.ineq_matrix = self.a.clone();
        lp.ineq_rhs = self.b.clone();
        lp
    }

    /// A feasible point, or `None` when phase one fails.
    pub fn feasible_point(&self, tol: f64) -> Result<Option<Vec<f64>>, ModelError> {
        let out = solve_lp_with(&self.forward_lp(&vec![0.0; self.n()]), &LpOptions { tol, ..LpOptions::default() })?;
        Ok((out.status == LpStatus::Optimal).then_some(out.x))
    }
}
