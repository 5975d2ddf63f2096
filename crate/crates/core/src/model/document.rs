//! The v1 JSON interchange document.

use serde::{Deserialize, Serialize};

use super::{
    ConstraintHierarchy, InverseProblem, LossKind, ModelError, NormalizationSet, ObservationSummary, PolyhedralRegion,
    RowClass,
};
use crate::numeric::linalg::DenseMatrix;

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDoc {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<RowClass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservationsDoc {
    Points {
        points: Vec<Vec<f64>>,
    },
    Summary {
        count: usize,
        centroid: Vec<f64>,
        sq_dev: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        median: Option<Vec<f64>>,
    },
}

/// A named linear expression `cᵀz` reported alongside solutions, with optional
/// reference bounds (for example a nutrient total and its guideline band).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedQuantity {
    pub name: String,
    pub coefficients: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub version: String,
    pub region: RegionDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<ConstraintHierarchy>,
    pub observations: ObservationsDoc,
    #[serde(default = "default_loss")]
    pub loss: LossKind,
    #[serde(default)]
    pub normalization: NormalizationSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantities: Vec<TrackedQuantity>,
}

fn default_loss() -> LossKind {
    LossKind::Squared
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| ModelError::Document(e.to_string()))?;
        if doc.version != SCHEMA_VERSION {
            return Err(ModelError::Document(format!("unsupported schema version {:?}", doc.version)));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn to_problem(&self) -> Result<InverseProblem, ModelError> {
        let n = self.region.a.first().map_or(0, Vec::len);
        let a = DenseMatrix::from_rows(n, &self.region.a)?;
        let m = a.rows();
        let labels = self.region.labels.clone().unwrap_or_else(|| vec![RowClass::Structural; m]);
        let region = match &self.region.names {
            Some(names) => PolyhedralRegion::with_names(a, self.region.b.clone(), labels, names.clone())?,
            None => PolyhedralRegion::new(a, self.region.b.clone(), labels)?,
        };
        let hierarchy = self.hierarchy.clone().unwrap_or_else(|| ConstraintHierarchy::from_labels(region.labels()));
        let observations = match &self.observations {
            ObservationsDoc::Points { points } => ObservationSummary::from_points(points, true)?,
            ObservationsDoc::Summary { count, centroid, sq_dev, median } => {
                let s = ObservationSummary::from_moments(*count, centroid.clone(), *sq_dev)?;
                match median {
                    Some(md) => s.with_median(md.clone())?,
                    None => s,
                }
            }
        };
        Ok(InverseProblem { region, hierarchy, observations, loss: self.loss, normalization: self.normalization })
    }

    pub fn from_problem(problem: &InverseProblem) -> Self {
        let obs = &problem.observations;
        let observations = match obs.points() {
            Some(points) => ObservationsDoc::Points { points: points.to_vec() },
            None => ObservationsDoc::Summary {
                count: obs.count(),
                centroid: obs.centroid().to_vec(),
                sq_dev: obs.sq_dev(),
                median: obs.median().map(<[f64]>::to_vec),
            },
        };
        Self {
            version: SCHEMA_VERSION.to_string(),
            region: RegionDoc {
                a: problem.region.a().to_rows(),
                b: problem.region.b().to_vec(),
                labels: Some(problem.region.labels().to_vec()),
                names: Some(problem.region.names().to_vec()),
            },
            hierarchy: Some(problem.hierarchy.clone()),
            observations,
            loss: problem.loss,
            normalization: problem.normalization,
            variable_names: None,
            quantities: Vec::new(),
        }
    }
}
