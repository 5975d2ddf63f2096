//! Seeded instance generation, batch execution of the inverse solvers and
//! the distance/recovery/timing metrics.

pub mod batch;
pub mod config;
pub mod instance;
pub mod stats;

pub use batch::{run_batch, summarize, write_metrics_csv, BatchOptions, MetricsRow, ModelSpec, Summary, SummaryEntry};
pub use config::BenchConfig;
pub use instance::{evaluate_recovery, generate_instance, GeneratedInstance, InstanceSpec, Scenario};
pub use stats::{spearman, Spearman};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid instance spec: {0}")]
    Spec(String),
    #[error("instance generation failed after {0} redraws")]
    RetriesExhausted(usize),
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error(transparent)]
    Solve(#[from] invlearn_core::solvers::SolveError),
    #[error(transparent)]
    Geometry(#[from] invlearn_core::geometry::GeometryError),
    #[error(transparent)]
    Model(#[from] invlearn_core::model::ModelError),
    #[error(transparent)]
    Numeric(#[from] invlearn_core::numeric::NumericError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
