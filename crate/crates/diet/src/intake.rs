use std::io::Read;

use invlearn_core::model::{componentwise_median, ObservationSummary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{DietError, FoodGroupTable};

/// The bundled synthetic 50-day cohort over the bundled food groups.
pub const SAMPLE_INTAKE: &str = include_str!("../data/intake_sample.csv");

/// Reads one day of servings per line. Columns may come in any order but must
/// name exactly the table's groups; the result keeps the raw points and their
/// componentwise median.
pub fn ingest_intake_csv<R: Read>(input: R, groups: &FoodGroupTable) -> Result<ObservationSummary, DietError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    let mut column_of = vec![None; groups.len()];
    for (c, name) in header.iter().enumerate() {
        let j = groups
            .index_of(name)
            .ok_or_else(|| DietError::Intake { line: 1, message: format!("unknown food group column {name:?}") })?;
        if column_of[j].replace(c).is_some() {
            return Err(DietError::Intake { line: 1, message: format!("food group column {name:?} appears twice") });
        }
    }
    if let Some(j) = column_of.iter().position(Option::is_none) {
        return Err(DietError::Intake { line: 1, message: format!("missing food group column {:?}", groups.names()[j]) });
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DietError::Intake {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(groups.len());
        for (j, c) in column_of.iter().enumerate() {
            let cell = record.get(c.expect("all columns mapped")).unwrap_or_default();
            let group = &groups.names()[j];
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| DietError::Intake {
                line,
                message: format!("{group}: {cell:?} is not a number"),
            })?;
            if v < 0.0 {
                return Err(DietError::Intake { line, message: format!("{group}: negative servings {v}") });
            }
            row.push(v);
        }
        points.push(row);
    }
    if points.is_empty() {
        return Ok(ObservationSummary::empty(groups.len(), true));
    }
    let median = componentwise_median(&points);
    Ok(ObservationSummary::from_points(&points, true)?.with_median(median)?)
}

/// The observations followed by `copies` Gaussian perturbations of each. The
/// noise on group `j` has standard deviation `sigma` times the sample standard
/// deviation of column `j`; perturbed servings are clipped at zero.
pub fn perturb_observations(points: &[Vec<f64>], copies: usize, sigma: f64, seed: u64) -> Result<Vec<Vec<f64>>, DietError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(DietError::Config(format!("perturbation sigma must be nonnegative, got {sigma}")));
    }
    let k = points.len();
    let n = points.first().map_or(0, Vec::len);
    let scale: Vec<f64> = (0..n)
        .map(|j| {
            if k < 2 {
                return 0.0;
            }
            let mean = points.iter().map(|p| p[j]).sum::<f64>() / k as f64;
            let var = points.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            sigma * var.sqrt()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = points.to_vec();
    for p in points {
        for _ in 0..copies {
            out.push(p.iter().zip(&scale).map(|(v, s)| (v + s * unit.sample(&mut rng)).max(0.0)).collect());
        }
    }
    Ok(out)
}
