//! Diet recommendation layer: food-group and nutrient tables, regimen bound
//! presets, intake ingestion and assembly of the l1 inverse problem.

pub mod intake;
pub mod region;
pub mod regimen;
pub mod tables;

pub use intake::{ingest_intake_csv, perturb_observations, SAMPLE_INTAKE};
pub use region::{assemble_diet_problem, build_diet_region, extract_bounds, nutrient_quantities, DietModel, DEFAULT_CAP};
pub use regimen::{NutrientBound, RegimenBounds, DEFAULT_PRESET};
pub use tables::{FoodGroupTable, NutrientMatrix};

use invlearn_core::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum DietError {
    #[error("invalid table: {0}")]
    Table(String),
    #[error("invalid regimen: {0}")]
    Config(String),
    #[error("unknown regimen preset {0:?}")]
    UnknownPreset(String),
    #[error("line {line}: {message}")]
    Intake { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}
