use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{argmax, clip_grad_norm, Activation, Adam, GradientTape, Mlp};

use super::log::TrainLogRow;
use super::{derive_seed, AgentError, Environment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnConfig {
    pub lr: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between target-network copies.
    pub target_sync: u64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Steps over which epsilon decays linearly.
    pub eps_decay_steps: u64,
    pub gamma: f64,
    /// Training budget in simulated seconds.
    pub total_timesteps: u64,
    pub hidden: usize,
    pub max_grad_norm: f64,
    /// Environment steps per log row.
    pub log_every: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            lr: 1e-4,
            replay_capacity: 50_000,
            batch_size: 64,
            target_sync: 1000,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 20_000,
            gamma: 0.99,
            total_timesteps: 100_000,
            hidden: 64,
            max_grad_norm: 10.0,
            log_every: 200,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::Config(m.to_string()));
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return bad("need 0 < batch_size <= replay_capacity");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !((0.0..=1.0).contains(&self.eps_start) && (0.0..=1.0).contains(&self.eps_end)) {
            return bad("epsilon values must lie in [0, 1]");
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad("lr must be a finite non-negative number");
        }
        if self.target_sync == 0 || self.log_every == 0 || self.hidden == 0 {
            return bad("target_sync, log_every and hidden must be positive");
        }
        Ok(())
    }

    pub fn epsilon(&self, step: u64) -> f64 {
        if step >= self.eps_decay_steps {
            return self.eps_end;
        }
        let frac = step as f64 / self.eps_decay_steps as f64;
        self.eps_start + frac * (self.eps_end - self.eps_start)
    }
}

/// Fixed-capacity ring of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    next: usize,
    obs: Vec<Vec<f64>>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    next_obs: Vec<Vec<f64>>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer { capacity, next: 0, obs: Vec::new(), actions: Vec::new(), rewards: Vec::new(), next_obs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn push(&mut self, obs: Vec<f64>, action: usize, reward: f64, next_obs: Vec<f64>) {
        if self.obs.len() < self.capacity {
            self.obs.push(obs);
            self.actions.push(action);
            self.rewards.push(reward);
            self.next_obs.push(next_obs);
        } else {
            let i = self.next;
            self.obs[i] = obs;
            self.actions[i] = action;
            self.rewards[i] = reward;
            self.next_obs[i] = next_obs;
        }
        self.next = (self.next + 1) % self.capacity;
    }
}

#[derive(Debug, Clone)]
pub struct DqnOutcome {
    pub q_net: Mlp,
    pub log: Vec<TrainLogRow>,
    pub steps: u64,
    pub updates: u64,
    pub action_counts: Vec<u64>,
    pub sim_time_s: u64,
}

/// Entropy of the epsilon-greedy behaviour policy over `n` actions.
fn eps_greedy_entropy(eps: f64, n: usize) -> f64 {
    let nf = n as f64;
    let p_other = eps / nf;
    let p_best = 1.0 - eps + p_other;
    let h = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    h(p_best) + (nf - 1.0) * h(p_other)
}

/// Q-learning with experience replay and a periodically copied target
/// network; Huber loss on the temporal-difference error.
pub fn train_dqn<E: Environment>(env: &mut E, cfg: &DqnConfig, seed: u64) -> Result<DqnOutcome, AgentError> {
    cfg.validate()?;
    let n_actions = env.num_actions();
    let sizes = [env.obs_dim(), cfg.hidden, cfg.hidden, n_actions];
    let acts = [Activation::Relu, Activation::Relu, Activation::Linear];
    let mut q = Mlp::new(&sizes, &acts, 1.0, derive_seed(seed, 31))?;
    let mut target = q.clone();
    let mut opt = Adam::new(q.num_params(), cfg.lr);
    let mut tape = GradientTape::for_net(&q);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 32));
    let mut replay = ReplayBuffer::new(cfg.replay_capacity);
    let mut counts = vec![0u64; n_actions];
    let (mut steps, mut updates, mut sim_time) = (0u64, 0u64, 0u64);
    let mut log = Vec::new();
    let (mut w_reward, mut w_loss, mut w_updates, mut w_q, mut w_cycles) = (0.0, 0.0, 0u64, 0.0, 0usize);
    let mut w_steps = 0u64;
    if cfg.total_timesteps == 0 {
        return Ok(DqnOutcome { q_net: q, log, steps, updates, action_counts: counts, sim_time_s: 0 });
    }
    let mut obs = env.reset()?;
    let mut upstream = vec![0.0; n_actions];
    while sim_time < cfg.total_timesteps {
        let eps = cfg.epsilon(steps);
        let a = if rng.random::<f64>() < eps { rng.random_range(0..n_actions) } else { argmax(&q.forward(&obs)?) };
        let tr = env.step(a)?;
        sim_time += tr.elapsed_s;
        counts[a] += 1;
        steps += 1;
        w_steps += 1;
        w_reward += tr.reward;
        for c in &tr.cycles {
            w_q += c.q_cycle as f64;
            w_cycles += 1;
        }
        replay.push(std::mem::replace(&mut obs, tr.obs.clone()), a, tr.reward, tr.obs);

        // warm-up: no update until the buffer can fill a batch
        if replay.len() >= cfg.batch_size {
            tape.zero_grad();
            let inv = 1.0 / cfg.batch_size as f64;
            let mut loss = 0.0;
            for _ in 0..cfg.batch_size {
                let i = rng.random_range(0..replay.len());
                let next_q = target.forward(&replay.next_obs[i])?;
                let y = replay.rewards[i] + cfg.gamma * next_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let out = q.forward_tape(&replay.obs[i], &mut tape)?;
                let err = out[replay.actions[i]] - y;
                loss += if err.abs() <= 1.0 { 0.5 * err * err } else { err.abs() - 0.5 } * inv;
                upstream.iter_mut().for_each(|u| *u = 0.0);
                upstream[replay.actions[i]] = err.clamp(-1.0, 1.0) * inv;
                q.backward(&mut tape, &upstream)?;
            }
            clip_grad_norm(tape.grads_mut(), cfg.max_grad_norm);
            opt.step(q.params_mut(), tape.grads());
            if !loss.is_finite() || q.params().iter().any(|p| !p.is_finite()) {
                return Err(AgentError::Diverged(format!("non-finite TD loss after {updates} updates")));
            }
            updates += 1;
            w_loss += loss;
            w_updates += 1;
        }
        if steps % cfg.target_sync == 0 {
            target = q.clone();
        }
        if steps % cfg.log_every == 0 {
            log.push(TrainLogRow {
                rollout_idx: log.len(),
                sim_time_s: sim_time,
                mean_reward: w_reward / w_steps as f64,
                mean_q_cycle: (w_cycles > 0).then(|| w_q / w_cycles as f64),
                policy_entropy: eps_greedy_entropy(eps, n_actions),
                value_loss: if w_updates > 0 { w_loss / w_updates as f64 } else { 0.0 },
            });
            (w_reward, w_loss, w_updates, w_q, w_cycles, w_steps) = (0.0, 0.0, 0, 0.0, 0, 0);
        }
    }
    Ok(DqnOutcome { q_net: q, log, steps, updates, action_counts: counts, sim_time_s: sim_time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::BanditEnv;

    #[test]
    fn epsilon_schedule() {
        let c = DqnConfig::default();
        assert_eq!(c.epsilon(0), 1.0);
        assert!((c.epsilon(10_000) - 0.525).abs() < 1e-12);
        assert_eq!(c.epsilon(20_000), 0.05);
        assert_eq!(c.epsilon(90_000), 0.05);
    }

    #[test]
    fn replay_ring_overwrites_oldest() {
        let mut r = ReplayBuffer::new(3);
        for k in 0..5 {
            r.push(vec![k as f64], 0, k as f64, vec![]);
        }
        assert_eq!(r.len(), 3);
        let mut rewards = r.rewards.clone();
        rewards.sort_by(f64::total_cmp);
        assert_eq!(rewards, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn warm_up_skips_updates() {
        let mut env = BanditEnv::new(0);
        let cfg = DqnConfig { total_timesteps: 63, ..Default::default() };
        let out = train_dqn(&mut env, &cfg, 1).unwrap();
        assert_eq!(out.steps, 63);
        assert_eq!(out.updates, 0);
        let cfg = DqnConfig { total_timesteps: 70, ..Default::default() };
        assert_eq!(train_dqn(&mut env, &cfg, 1).unwrap().updates, 7);
    }

    #[test]
    fn capacity_below_batch_rejected() {
        let cfg = DqnConfig { replay_capacity: 10, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn behaviour_entropy_limits() {
        assert!((eps_greedy_entropy(1.0, 3) - 3f64.ln()).abs() < 1e-12);
        assert_eq!(eps_greedy_entropy(0.0, 3), 0.0);
    }
}
