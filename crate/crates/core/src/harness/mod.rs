//! Experiment orchestration: configuration, training, evaluation, sweeps,
//! checkpoints, complexity accounting, and metrics emission.

mod agents;
mod checkpoint;
mod complexity;
mod eval;
mod experiment;
mod metrics;
mod sweep;
mod train;
mod verify;

use thiserror::Error;

pub use agents::build_agents;
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use complexity::{
    report_model_complexity, stack_complexity, ComplexityReport, LayerComplexity, LayerCost,
};
pub use eval::{run_evaluation, EvalOutcome};
pub use experiment::{load_config, parse_config, ExperimentConfig, ExperimentError};
pub use metrics::{
    emit_metrics, parse_metrics, MetricsError, MetricsRow, MetricsWriter, METRICS_HEADER,
};
pub use sweep::{sweep, sweep_with_mode, SweepAxis, SweepRow, SweepTable};
pub use train::{
    measure_random_baseline, parse_rewards, run_training, EpisodeReward, RandomBaseline,
    TrainOutcome, REWARDS_HEADER,
};
pub use verify::{standard_gradient_checks, FamilyResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
    #[error(transparent)]
    Update(#[from] crate::happo::UpdateError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Sweep(String),
}
