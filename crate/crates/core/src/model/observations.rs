use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Squared,
    L1,
}

/// The dataset compressed to `(K, x̄, c₂)`, optionally with the raw points and
/// their componentwise median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSummary {
    count: usize,
    centroid: Vec<f64>,
    sq_dev: f64,
    points: Option<Vec<Vec<f64>>>,
    median: Option<Vec<f64>>,
}

impl ObservationSummary {
    /// A summary with no observations yet; `retain` keeps raw points on push.
    pub fn empty(n: usize, retain: bool) -> Self {
        Self { count: 0, centroid: vec![0.0; n], sq_dev: 0.0, points: retain.then(Vec::new), median: None }
    }

    pub fn from_points(points: &[Vec<f64>], retain: bool) -> Result<Self, ModelError> {
        let n = points.first().map(Vec::len).ok_or(ModelError::InsufficientData("at least one observation"))?;
        let mut s = Self::empty(n, retain);
        for p in points {
            s.push_in_place(p)?;
        }
        Ok(s)
    }

    /// Summary-only construction (no raw points, squared loss only).
    pub fn from_moments(count: usize, centroid: Vec<f64>, sq_dev: f64) -> Result<Self, ModelError> {
        if centroid.iter().any(|v| !v.is_finite()) || !sq_dev.is_finite() {
            return Err(ModelError::NonFinite("observation summary"));
        }
        if sq_dev < 0.0 {
            return Err(ModelError::InsufficientData("nonnegative squared deviation"));
        }
        Ok(Self { count, centroid, sq_dev, points: None, median: None })
    }

    pub fn with_median(mut self, median: Vec<f64>) -> Result<Self, ModelError> {
        if median.len() != self.centroid.len() {
            return Err(ModelError::Dimension { context: "median", expected: self.centroid.len(), found: median.len() });
        }
        self.median = Some(median);
        Ok(self)
    }

    pub fn push_observation(&self, x: &[f64]) -> Result<Self, ModelError> {
        let mut s = self.clone();
        s.push_in_place(x)?;
        Ok(s)
    }

    fn push_in_place(&mut self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.centroid.len() {
            return Err(ModelError::Dimension { context: "observation", expected: self.centroid.len(), found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("observation"));
        }
        let k = self.count as f64;
        let d2: f64 = x.iter().zip(&self.centroid).map(|(a, b)| (a - b) * (a - b)).sum();
        self.sq_dev += k / (k + 1.0) * d2;
        for (c, v) in self.centroid.iter_mut().zip(x) {
            *c = (k * *c + v) / (k + 1.0);
        }
        self.count += 1;
        if let Some(points) = &mut self.points {
            points.push(x.to_vec());
            self.median = Some(componentwise_median(points));
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.centroid.len()
    }

    pub fn centroid(&self) -> &[f64] {
        &self.centroid
    }

    pub fn sq_dev(&self) -> f64 {
        self.sq_dev
    }

    pub fn points(&self) -> Option<&[Vec<f64>]> {
        self.points.as_deref()
    }

    pub fn median(&self) -> Option<&[f64]> {
        self.median.as_deref()
    }

    /// `K‖z − x̄‖² + c₂` for squared loss, `Σ_k ‖x^k − z‖₁` for l1.
    pub fn total_loss(&self, z: &[f64], loss: LossKind) -> Result<f64, ModelError> {
        if z.len() != self.dim() {
            return Err(ModelError::Dimension { context: "loss point", expected: self.dim(), found: z.len() });
        }
        match loss {
            LossKind::Squared => {
                let d2: f64 = z.iter().zip(&self.centroid).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok(self.count as f64 * d2 + self.sq_dev)
            }
            LossKind::L1 => {
                let points = self.points.as_ref().ok_or(ModelError::InsufficientData("raw points for l1 loss"))?;
                Ok(points.iter().map(|p| p.iter().zip(z).map(|(a, b)| (a - b).abs()).sum::<f64>()).sum())
            }
        }
    }
}

pub fn componentwise_median(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| {
            let mut col: Vec<f64> = points.iter().map(|p| p[j]).collect();
            col.sort_by(f64::total_cmp);
            let k = col.len();
            if k % 2 == 1 {
                col[k / 2]
            } else {
                0.5 * (col[k / 2 - 1] + col[k / 2])
            }
        })
        .collect()
}
