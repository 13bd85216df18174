use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AgentError, Environment, Transition};

/// Two-context bandit used as a learning sanity check: the context is a
/// random one-hot, action 0 always pays 1 and the others pay 0.
#[derive(Debug, Clone)]
pub struct BanditEnv {
    rng: ChaCha8Rng,
    seed: u64,
    context: usize,
}

impl BanditEnv {
    pub fn new(seed: u64) -> Self {
        BanditEnv { rng: ChaCha8Rng::seed_from_u64(seed), seed, context: 0 }
    }

    fn obs(&self) -> Vec<f64> {
        let mut o = vec![0.0; 2];
        o[self.context] = 1.0;
        o
    }
}

impl Environment for BanditEnv {
    fn obs_dim(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        3
    }

    fn reset(&mut self) -> Result<Vec<f64>, AgentError> {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.context = self.rng.random_range(0..2);
        Ok(self.obs())
    }

    fn step(&mut self, action: usize) -> Result<Transition, AgentError> {
        if action >= 3 {
            return Err(AgentError::Config(format!("action {action} out of range")));
        }
        let reward = if action == 0 { 1.0 } else { 0.0 };
        self.context = self.rng.random_range(0..2);
        Ok(Transition { obs: self.obs(), reward, elapsed_s: 1, cycles: Vec::new() })
    }
}
