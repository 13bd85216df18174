use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{Activation, Adam, GradientTape, Mlp};
use crate::repr::{Normalizer, Observer, Representation, EXPANDED_DIM, LATENT_DIMS};
use crate::sim::{FlowProfile, FlowSegment, IntersectionLayout, PhasePlan, Regime, SimState, HIGH_DEMAND_VPH, NUM_PHASES};
use crate::weights::{FileKind, WeightFile};

use super::{derive_seed, AgentError};

/// How the pretraining buffer is gathered: fixed-time control over a
/// sequence of segments, each with its own random demand and random
/// programmed greens so the buffer covers the whole state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BufferConfig {
    pub n_states: usize,
    /// Simulated seconds between stored states.
    pub sample_every_s: u64,
    pub segment_s: u64,
    /// Demand multiplier range applied to the high-demand rates.
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for BufferConfig {
    fn default() -> Self {
        BufferConfig { n_states: 10_000, sample_every_s: 5, segment_s: 900, scale_min: 0.2, scale_max: 1.3 }
    }
}

pub fn collect_state_buffer(
    cfg: &BufferConfig,
    layout: &IntersectionLayout,
    plan: &PhasePlan,
    seed: u64,
) -> Result<Vec<[f64; EXPANDED_DIM]>, AgentError> {
    if cfg.sample_every_s == 0 || cfg.segment_s == 0 || !(cfg.scale_min >= 0.0 && cfg.scale_min <= cfg.scale_max) {
        return Err(AgentError::Config("invalid state-buffer settings".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 11));
    let horizon = cfg.n_states as u64 * cfg.sample_every_s;
    let n_segments = horizon.div_ceil(cfg.segment_s).max(1);
    let mut segments = Vec::new();
    let mut greens = Vec::new();
    for k in 0..n_segments {
        let scale = rng.random_range(cfg.scale_min..=cfg.scale_max);
        let regime = match scale {
            s if s >= 0.85 => Regime::High,
            s if s >= 0.55 => Regime::Medium,
            _ => Regime::Low,
        };
        let rates = HIGH_DEMAND_VPH.map(|r| r * scale * rng.random_range(0.7..1.3));
        segments.push(FlowSegment { start_s: k * cfg.segment_s, end_s: (k + 1) * cfg.segment_s, regime, rates_vph: rates });
        let g: [u32; NUM_PHASES] = std::array::from_fn(|_| rng.random_range(plan.g_min_s..=plan.g_max_s));
        greens.push(g);
    }
    let flows = FlowProfile { segments, repeat: false };
    let mut sim = SimState::new(layout.clone(), plan.clone(), flows, derive_seed(seed, 12))?;
    let mut obs = Observer::new(Representation::Expanded, Normalizer::default())?;
    let mut out = Vec::with_capacity(cfg.n_states);
    sim.install_greens(greens[0]);
    while out.len() < cfg.n_states {
        sim.step();
        let t = sim.clock();
        if t % cfg.segment_s == 0 {
            if let Some(g) = greens.get((t / cfg.segment_s) as usize) {
                sim.install_greens(*g);
            }
        }
        if t % cfg.sample_every_s == 0 {
            let v = obs.observe(&sim);
            out.push(std::array::from_fn(|i| v[i]));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AeConfig {
    pub latent: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Accept a latent size outside the usual set (with a warning).
    pub allow_nonstandard_latent: bool,
}

impl Default for AeConfig {
    fn default() -> Self {
        AeConfig { latent: 16, hidden: 32, epochs: 60, lr: 1e-3, batch_size: 64, allow_nonstandard_latent: false }
    }
}

impl AeConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        if self.latent == 0 || self.hidden == 0 || self.batch_size == 0 {
            return Err(AgentError::Config("latent, hidden and batch_size must be positive".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(AgentError::Config("lr must be a finite non-negative number".into()));
        }
        if !LATENT_DIMS.contains(&self.latent) {
            if !self.allow_nonstandard_latent {
                return Err(AgentError::Config(format!(
                    "latent size {} is not one of {:?}; set allow_nonstandard_latent to use it",
                    self.latent, LATENT_DIMS
                )));
            }
            eprintln!("warning: latent size {} is outside {:?}", self.latent, LATENT_DIMS);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AeOutcome {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub initial_mse: f64,
    pub final_mse: f64,
    /// Buffer MSE after each epoch.
    pub epoch_mse: Vec<f64>,
}

impl AeOutcome {
    pub fn to_weight_file(&self, seed: u64) -> WeightFile {
        let mut f = WeightFile::new(FileKind::Network, seed, format!("ae{}", self.encoder.output_dim()));
        f.push_network("encoder", &self.encoder);
        f.push_network("decoder", &self.decoder);
        f
    }
}

/// Mean over the buffer of the squared reconstruction error, summed over
/// the state components.
pub fn reconstruction_mse(encoder: &Mlp, decoder: &Mlp, buffer: &[[f64; EXPANDED_DIM]]) -> Result<f64, AgentError> {
    let mut total = 0.0;
    for s in buffer {
        let y = decoder.forward(&encoder.forward(s)?)?;
        total += y.iter().zip(s).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    Ok(total / buffer.len().max(1) as f64)
}

/// Networks `19 -> hidden -> k` and `k -> hidden -> 19` (relu hidden,
/// linear code and output) as initialized for `seed`.
pub fn init_autoencoder(cfg: &AeConfig, seed: u64) -> Result<(Mlp, Mlp), AgentError> {
    let acts = [Activation::Relu, Activation::Linear];
    let enc = Mlp::new(&[EXPANDED_DIM, cfg.hidden, cfg.latent], &acts, 1.0, derive_seed(seed, 21))?;
    let dec = Mlp::new(&[cfg.latent, cfg.hidden, EXPANDED_DIM], &acts, 1.0, derive_seed(seed, 22))?;
    Ok((enc, dec))
}

pub fn train_autoencoder(buffer: &[[f64; EXPANDED_DIM]], cfg: &AeConfig, seed: u64) -> Result<AeOutcome, AgentError> {
    cfg.validate()?;
    if buffer.is_empty() {
        return Err(AgentError::Config("empty state buffer".into()));
    }
    let (mut enc, mut dec) = init_autoencoder(cfg, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 23));
    let mut opt_e = Adam::new(enc.num_params(), cfg.lr);
    let mut opt_d = Adam::new(dec.num_params(), cfg.lr);
    let mut te = GradientTape::for_net(&enc);
    let mut td = GradientTape::for_net(&dec);
    let initial = reconstruction_mse(&enc, &dec, buffer)?;
    let mut epoch_mse = Vec::with_capacity(cfg.epochs);
    let mut idx: Vec<usize> = (0..buffer.len()).collect();
    let mut g = [0.0; EXPANDED_DIM];
    for _ in 0..cfg.epochs {
        idx.shuffle(&mut rng);
        for chunk in idx.chunks(cfg.batch_size) {
            te.zero_grad();
            td.zero_grad();
            let scale = 2.0 / chunk.len() as f64;
            for &i in chunk {
                let s = &buffer[i];
                let z = enc.forward_tape(s, &mut te)?;
                let y = dec.forward_tape(&z, &mut td)?;
                for k in 0..EXPANDED_DIM {
                    g[k] = scale * (y[k] - s[k]);
                }
                let dz = dec.backward(&mut td, &g)?;
                enc.backward(&mut te, &dz)?;
            }
            opt_e.step(enc.params_mut(), te.grads());
            opt_d.step(dec.params_mut(), td.grads());
        }
        let mse = reconstruction_mse(&enc, &dec, buffer)?;
        if !mse.is_finite() {
            return Err(AgentError::Diverged("autoencoder loss is not finite".into()));
        }
        epoch_mse.push(mse);
    }
    let final_mse = epoch_mse.last().copied().unwrap_or(initial);
    Ok(AeOutcome { encoder: enc, decoder: dec, initial_mse: initial, final_mse, epoch_mse })
}
