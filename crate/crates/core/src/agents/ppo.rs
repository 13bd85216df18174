use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{actor_critic_sizes, clip_grad_norm, entropy, log_softmax, softmax, softmax_sample, Adam, GradientTape, Mlp, TANH_TRUNK};

use super::gae::{compute_gae, normalize};
use super::log::TrainLogRow;
use super::{derive_seed, AgentError, Environment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub lr: f64,
    /// Decisions collected per rollout.
    pub n_steps: usize,
    pub batch_size: usize,
    pub n_epochs: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    /// Training budget in simulated seconds.
    pub total_timesteps: u64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Global gradient-norm cap over both networks.
    pub max_grad_norm: f64,
    /// Mean |ratio - 1| on a minibatch above which training aborts.
    pub divergence_threshold: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            // 3e-6 barely moves the policy in a 100k-second budget here
            lr: 3e-4,
            n_steps: 200,
            batch_size: 64,
            n_epochs: 10,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_eps: 0.2,
            total_timesteps: 100_000,
            value_coef: 0.5,
            entropy_coef: 0.01,
            max_grad_norm: 0.5,
            divergence_threshold: 10.0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::Config(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return bad("clip_eps must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must lie in [0, 1]");
        }
        if self.n_steps == 0 || self.batch_size == 0 || self.batch_size > self.n_steps {
            return bad("need 0 < batch_size <= n_steps");
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad("lr must be a finite non-negative number");
        }
        if !(self.max_grad_norm > 0.0) {
            return bad("max_grad_norm must be positive");
        }
        Ok(())
    }
}

/// `min(r A, clip(r, 1 - eps, 1 + eps) A)` for one sample.
pub fn clipped_objective(ratio: f64, advantage: f64, eps: f64) -> f64 {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * advantage;
    unclipped.min(clipped)
}

/// Samples for one gradient step.
#[derive(Debug, Clone, Default)]
pub struct MiniBatch {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl MiniBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SurrogateOutput {
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mean_abs_ratio_dev: f64,
    pub clip_fraction: f64,
    pub policy_grads: Vec<f64>,
    pub value_grads: Vec<f64>,
}

/// Clipped-surrogate loss plus value regression minus entropy bonus, with
/// its gradients with respect to both networks.
pub fn ppo_surrogate(batch: &MiniBatch, policy: &Mlp, value: &Mlp, cfg: &PpoConfig) -> Result<SurrogateOutput, AgentError> {
    let n = batch.len();
    if n == 0 {
        return Err(AgentError::Config("empty minibatch".into()));
    }
    let inv_n = 1.0 / n as f64;
    let mut pt = GradientTape::for_net(policy);
    let mut vt = GradientTape::for_net(value);
    let (mut pg, mut vl, mut ent, mut dev, mut clipped) = (0.0, 0.0, 0.0, 0.0, 0usize);
    let mut upstream = vec![0.0; policy.output_dim()];
    for i in 0..n {
        let o = &batch.obs[i];
        let a = batch.actions[i];
        let adv = batch.advantages[i];
        let logits = policy.forward_tape(o, &mut pt)?;
        let logp = log_softmax(&logits);
        let p = softmax(&logits);
        let ratio = (logp[a] - batch.old_log_probs[i]).exp();
        if !ratio.is_finite() {
            return Err(AgentError::Diverged(format!("non-finite probability ratio at sample {i} (logits {logits:?})")));
        }
        let obj = clipped_objective(ratio, adv, cfg.clip_eps);
        let unclipped_active = ratio * adv <= obj;
        if !unclipped_active {
            clipped += 1;
        }
        let h = entropy(&p);
        pg -= obj * inv_n;
        ent += h * inv_n;
        dev += (ratio - 1.0).abs() * inv_n;
        // d(obj)/d(log pi(a)) is r A on the unclipped branch, 0 otherwise
        let d_logp = if unclipped_active { ratio * adv } else { 0.0 };
        for k in 0..p.len() {
            let d_logp_dz = (k == a) as u8 as f64 - p[k];
            let d_h_dz = -p[k] * (logp[k] + h);
            upstream[k] = -inv_n * d_logp * d_logp_dz - cfg.entropy_coef * inv_n * d_h_dz;
        }
        policy.backward(&mut pt, &upstream)?;

        let v = value.forward_tape(o, &mut vt)?[0];
        let err = v - batch.returns[i];
        vl += err * err * inv_n;
        value.backward(&mut vt, &[cfg.value_coef * 2.0 * err * inv_n])?;
    }
    Ok(SurrogateOutput {
        loss: pg + cfg.value_coef * vl - cfg.entropy_coef * ent,
        policy_loss: pg,
        value_loss: vl,
        entropy: ent,
        mean_abs_ratio_dev: dev,
        clip_fraction: clipped as f64 * inv_n,
        policy_grads: pt.grads().to_vec(),
        value_grads: vt.grads().to_vec(),
    })
}

#[derive(Debug, Clone)]
pub struct PpoOutcome {
    pub policy: Mlp,
    pub value: Mlp,
    pub log: Vec<TrainLogRow>,
    pub sim_time_s: u64,
    pub updates: u64,
}

/// Policy and value networks as initialized for `seed`.
pub fn init_networks(obs_dim: usize, n_actions: usize, seed: u64) -> Result<(Mlp, Mlp), AgentError> {
    let policy = Mlp::new(&actor_critic_sizes(obs_dim, n_actions), &TANH_TRUNK, 0.01, derive_seed(seed, 1))?;
    let value = Mlp::new(&actor_critic_sizes(obs_dim, 1), &TANH_TRUNK, 1.0, derive_seed(seed, 2))?;
    Ok((policy, value))
}

/// Rollout / update loop on one continuing environment until
/// `cfg.total_timesteps` simulated seconds have elapsed.
pub fn train_ppo<E: Environment>(env: &mut E, cfg: &PpoConfig, seed: u64) -> Result<PpoOutcome, AgentError> {
    cfg.validate()?;
    let (mut policy, mut value) = init_networks(env.obs_dim(), env.num_actions(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let mut opt_pi = Adam::new(policy.num_params(), cfg.lr);
    let mut opt_v = Adam::new(value.num_params(), cfg.lr);
    let mut log = Vec::new();
    let mut sim_time = 0u64;
    let mut updates = 0u64;
    if cfg.total_timesteps == 0 {
        return Ok(PpoOutcome { policy, value, log, sim_time_s: 0, updates });
    }
    let mut obs = env.reset()?;
    let n = cfg.n_steps;
    while sim_time < cfg.total_timesteps {
        let mut roll = MiniBatch::default();
        let mut rewards = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut q_cycles = Vec::new();
        let mut ent_sum = 0.0;
        for _ in 0..n {
            let logits = policy.forward(&obs)?;
            let (a, logp, probs) = softmax_sample(&logits, &mut rng)?;
            ent_sum += entropy(&probs);
            values.push(value.forward(&obs)?[0]);
            let tr = env.step(a)?;
            sim_time += tr.elapsed_s;
            q_cycles.extend(tr.cycles.iter().map(|c| c.q_cycle as f64));
            roll.obs.push(std::mem::replace(&mut obs, tr.obs));
            roll.actions.push(a);
            roll.old_log_probs.push(logp);
            rewards.push(tr.reward);
        }
        let next_value = value.forward(&obs)?[0];
        let (mut adv, ret) = compute_gae(&rewards, &values, next_value, cfg.gamma, cfg.gae_lambda);
        normalize(&mut adv);
        roll.advantages = adv;
        roll.returns = ret;

        let mut idx: Vec<usize> = (0..n).collect();
        let mut vloss_sum = 0.0;
        let mut batches = 0usize;
        for _ in 0..cfg.n_epochs {
            idx.shuffle(&mut rng);
            for chunk in idx.chunks(cfg.batch_size) {
                let mb = MiniBatch {
                    obs: chunk.iter().map(|&i| roll.obs[i].clone()).collect(),
                    actions: chunk.iter().map(|&i| roll.actions[i]).collect(),
                    old_log_probs: chunk.iter().map(|&i| roll.old_log_probs[i]).collect(),
                    advantages: chunk.iter().map(|&i| roll.advantages[i]).collect(),
                    returns: chunk.iter().map(|&i| roll.returns[i]).collect(),
                };
                let mut out = ppo_surrogate(&mb, &policy, &value, cfg)?;
                if out.mean_abs_ratio_dev > cfg.divergence_threshold {
                    return Err(AgentError::Diverged(format!(
                        "mean |ratio - 1| = {:.3} after {} updates",
                        out.mean_abs_ratio_dev, updates
                    )));
                }
                let np = out.policy_grads.len();
                let mut all = std::mem::take(&mut out.policy_grads);
                all.append(&mut out.value_grads);
                clip_grad_norm(&mut all, cfg.max_grad_norm);
                opt_pi.step(policy.params_mut(), &all[..np]);
                opt_v.step(value.params_mut(), &all[np..]);
                if policy.params().iter().chain(value.params()).any(|p| !p.is_finite()) {
                    return Err(AgentError::Diverged(format!("non-finite parameters after {} updates", updates + 1)));
                }
                updates += 1;
                vloss_sum += out.value_loss;
                batches += 1;
            }
        }
        log.push(TrainLogRow {
            rollout_idx: log.len(),
            sim_time_s: sim_time,
            mean_reward: rewards.iter().sum::<f64>() / n as f64,
            mean_q_cycle: (!q_cycles.is_empty()).then(|| q_cycles.iter().sum::<f64>() / q_cycles.len() as f64),
            policy_entropy: ent_sum / n as f64,
            value_loss: if batches > 0 { vloss_sum / batches as f64 } else { 0.0 },
        });
    }
    Ok(PpoOutcome { policy, value, log, sim_time_s: sim_time, updates })
}
