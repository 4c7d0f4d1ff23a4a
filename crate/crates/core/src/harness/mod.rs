//! Benchmark harness: scenario generation, run metrics, benchmark
//! orchestration and training-data export.

mod benchmark;
mod export;
mod metrics;
mod presets;
mod scenario;

pub use benchmark::{
    render_table, run_benchmark, Aggregate, BenchmarkOptions, BenchmarkReport, PlannerFactory,
    RunRow,
};
pub use export::{
    export_training_data, replay_record, training_record, ChatRecord, ExportFormat, ExportStats,
    RunArtifact, TrainingRecord,
};
pub use metrics::{compute_metrics, RunMetrics};
pub use presets::{base_network, build_preset, preset_names, tie_feeder_network};
pub use scenario::{
    apply_scenario, generate_scenario, GeneratorConfig, Perturbation, Scenario, ScenarioTarget,
    ViolationProfile,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("target violation profile unreachable within the search budget (best: {best} violations after {evals} evaluations)")]
    TargetUnreachable { best: usize, evals: usize },
    #[error("unknown base network `{0}`")]
    UnknownBase(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("scenario references unknown element: {0}")]
    BadReference(String),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
    #[error(transparent)]
    Case(#[from] crate::caseio::CaseError),
    #[error("{0}")]
    Internal(String),
}
