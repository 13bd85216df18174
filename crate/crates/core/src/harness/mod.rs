//! Experiment orchestration: episodes, per-cycle metrics, multi-seed
//! comparison, correlation analysis and output files.

mod config;
mod episode;
mod experiment;
mod output;
mod stats;

pub use config::{ControllerKind, ExperimentConfig, GridConfig};
pub use episode::{run_episode, EpisodeResult, EpisodeSpec, TickRow};
pub use experiment::{
    build_representation, episode_spec, evaluate, pretrain_autoencoder, run_grid, run_seed, train_policy,
    SeedOutcome, Trained, EVAL_SEED_OFFSET,
};
pub use output::{write_cycles_csv, write_file, write_seed_outcome, write_summary_csv, write_ticks_csv};
pub use stats::{
    compare, correlation_report, mean_std, pearson, CorrelationReport, RunRecord, SummaryRow,
    MIN_CORRELATION_CYCLES,
};

use crate::agents::AgentError;
use crate::baselines::WebsterError;
use crate::repr::ReprError;
use crate::rewards::RewardError;
use crate::sim::SimError;
use crate::weights::WeightsError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad flags or an impossible combination; exit status 1.
    #[error("usage: {0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Webster(#[from] WebsterError),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
}

impl HarnessError {
    /// Process exit status: 1 for usage errors, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            _ => 2,
        }
    }
}
