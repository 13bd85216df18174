//! Learning algorithms: PPO, the state autoencoder and a dense DQN baseline,
//! plus the environments they train against.

mod autoencoder;
mod bandit;
mod bundle;
mod dqn;
mod env;
mod gae;
mod log;
mod ppo;

pub use autoencoder::{
    collect_state_buffer, reconstruction_mse, train_autoencoder, AeConfig, AeOutcome, BufferConfig,
};
pub use bandit::BanditEnv;
pub use bundle::{ActionSelection, Algo, ObsEncoding, PolicyBundle, PolicyController};
pub use dqn::{train_dqn, DqnConfig, DqnOutcome, ReplayBuffer};
pub use env::{lane_features, EnvConfig, TscEnv, LANE_FEATURES_DIM};
pub use gae::{compute_gae, normalize};
pub use log::{write_training_log, TrainLogRow};
pub use ppo::{clipped_objective, init_networks, ppo_surrogate, train_ppo, MiniBatch, PpoConfig, PpoOutcome, SurrogateOutput};

use crate::metrics::CycleRecord;
use crate::nn::NnError;
use crate::repr::ReprError;
use crate::rewards::RewardError;
use crate::sim::SimError;
use crate::weights::WeightsError;

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("training diverged: {0}")]
    Diverged(String),
}

/// Independent seed for the `stream`-th random source of a run.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// Simulated seconds the step took.
    pub elapsed_s: u64,
    /// Cycles that finished during the step.
    pub cycles: Vec<CycleRecord>,
}

/// A continuing task with a discrete action set.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn reset(&mut self) -> Result<Vec<f64>, AgentError>;
    fn step(&mut self, action: usize) -> Result<Transition, AgentError>;
}
