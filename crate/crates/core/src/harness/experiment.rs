use crate::agents::{
    collect_state_buffer, train_autoencoder, train_dqn, train_ppo, AeOutcome, Algo, EnvConfig, ObsEncoding,
    PolicyBundle, TrainLogRow, TscEnv,
};
use crate::baselines::{DynamicWebster, FixedTime, WebsterEvent};
use crate::control::Controller;
use crate::par;
use crate::repr::{KPlanesParams, Normalizer, ReprKind, Representation};
use crate::rewards::{RewardKind, RewardSpec};
use crate::weights::WeightFile;

use super::config::{ControllerKind, ExperimentConfig};
use super::episode::{run_episode, EpisodeResult, EpisodeSpec};
use super::stats::RunRecord;
use super::HarnessError;

/// Evaluation traffic is drawn from a different stream than training
/// traffic: seed `s` trains on `s` and is evaluated on `s + EVAL_SEED_OFFSET`.
pub const EVAL_SEED_OFFSET: u64 = 10_000;

/// Encoding named by the config: latent variants use the configured
/// encoder file or pretrain one for `seed`.
pub fn build_representation(
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(Representation, Option<AeOutcome>), HarnessError> {
    Ok(match cfg.repr_kind()? {
        ReprKind::Baseline => (Representation::Baseline, None),
        ReprKind::Expanded => (Representation::Expanded, None),
        ReprKind::KPlanes => (Representation::KPlanes(KPlanesParams::new(cfg.kplanes_seed.unwrap_or(seed))), None),
        ReprKind::Latent(k) => {
            if let Some(path) = &cfg.encoder {
                let enc = WeightFile::load(path)?.network("encoder")?;
                if enc.output_dim() != k {
                    return Err(HarnessError::Config(format!(
                        "encoder in {} has latent size {}, config asks for {k}",
                        path.display(),
                        enc.output_dim()
                    )));
                }
                (Representation::Latent(enc), None)
            } else {
                let ae = pretrain_autoencoder(cfg, k, seed)?;
                (Representation::Latent(ae.encoder.clone()), Some(ae))
            }
        }
    })
}

pub fn pretrain_autoencoder(cfg: &ExperimentConfig, latent: usize, seed: u64) -> Result<AeOutcome, HarnessError> {
    let buffer = collect_state_buffer(&cfg.buffer, &cfg.layout, &cfg.plan, seed)?;
    let ae_cfg = crate::agents::AeConfig { latent, ..cfg.ae.clone() };
    Ok(train_autoencoder(&buffer, &ae_cfg, seed)?)
}

/// Trained artifact of one learned run.
#[derive(Debug, Clone)]
pub struct Trained {
    pub bundle: PolicyBundle,
    pub log: Vec<TrainLogRow>,
    pub autoencoder: Option<AeOutcome>,
}

/// Trains the configured learner on training seed `seed`.
pub fn train_policy(cfg: &ExperimentConfig, seed: u64) -> Result<Trained, HarnessError> {
    let env_cfg = |reward: RewardSpec| EnvConfig {
        layout: cfg.layout.clone(),
        plan: cfg.plan.clone(),
        flows: cfg.flow_profile(),
        reward,
        seed,
    };
    match cfg.controller {
        ControllerKind::Ppo => {
            let (repr, autoencoder) = build_representation(cfg, seed)?;
            let norm = Normalizer::for_horizon(cfg.ppo.total_timesteps, &cfg.plan);
            let encoding = ObsEncoding::Repr { repr, norm };
            let mut env = TscEnv::new(env_cfg(cfg.reward), encoding.clone())?;
            let out = train_ppo(&mut env, &cfg.ppo, seed)?;
            let bundle = PolicyBundle { algo: Algo::Ppo, encoding, policy: out.policy, value: Some(out.value), seed };
            Ok(Trained { bundle, log: out.log, autoencoder })
        }
        ControllerKind::Dqn => {
            let reward = RewardSpec { kind: RewardKind::RescoWait, ..cfg.reward };
            let mut env = TscEnv::new(env_cfg(reward), ObsEncoding::Lanes)?;
            let out = train_dqn(&mut env, &cfg.dqn, seed)?;
            let bundle = PolicyBundle { algo: Algo::Dqn, encoding: ObsEncoding::Lanes, policy: out.q_net, value: None, seed };
            Ok(Trained { bundle, log: out.log, autoencoder: None })
        }
        ControllerKind::Fixed | ControllerKind::Webster => {
            Err(HarnessError::Usage(format!("controller '{}' has nothing to train", cfg.config_id())))
        }
    }
}

pub fn episode_spec(cfg: &ExperimentConfig, eval_seed: u64) -> EpisodeSpec {
    EpisodeSpec {
        layout: cfg.layout.clone(),
        plan: cfg.plan.clone(),
        flows: cfg.flow_profile(),
        horizon_s: cfg.horizon_s,
        seed: eval_seed,
        record_ticks: false,
        record_events: false,
    }
}

/// Evaluates a baseline, or `bundle` for learned controllers, on `spec`.
pub fn evaluate(
    cfg: &ExperimentConfig,
    spec: &EpisodeSpec,
    bundle: Option<&PolicyBundle>,
) -> Result<(EpisodeResult, Vec<WebsterEvent>), HarnessError> {
    match cfg.controller {
        ControllerKind::Fixed => Ok((run_episode(spec, &mut FixedTime)?, Vec::new())),
        ControllerKind::Webster => {
            let mut w = DynamicWebster::new(&cfg.webster, &cfg.layout, &cfg.plan, spec.flows.initial_rates())?;
            let r = run_episode(spec, &mut w)?;
            Ok((r, w.events().to_vec()))
        }
        ControllerKind::Ppo | ControllerKind::Dqn => {
            let b = bundle.ok_or_else(|| HarnessError::Usage("a learned controller needs weights".into()))?;
            let selection = cfg.eval_actions;
            let mut ctl = b.controller_for_horizon(spec.horizon_s, &spec.plan, selection, spec.seed)?;
            Ok((run_episode(spec, &mut ctl as &mut dyn Controller)?, Vec::new()))
        }
    }
}

/// Everything one (configuration, seed) job produced.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub config_id: String,
    pub seed: u64,
    pub episode: EpisodeResult,
    pub trained: Option<Trained>,
    pub webster_events: Vec<WebsterEvent>,
}

impl SeedOutcome {
    pub fn run_record(&self, horizon_s: u64) -> RunRecord {
        RunRecord {
            config_id: self.config_id.clone(),
            seed: self.seed,
            horizon_s,
            cycles: self.episode.cycles.clone(),
        }
    }
}

/// Train (if learned and no weights given) then evaluate for one seed.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome, HarnessError> {
    let trained = match (cfg.controller.is_learned(), &cfg.weights) {
        (false, _) => None,
        (true, Some(path)) => {
            Some(Trained { bundle: PolicyBundle::load(path)?, log: Vec::new(), autoencoder: None })
        }
        (true, None) => Some(train_policy(cfg, seed)?),
    };
    let spec = episode_spec(cfg, seed.wrapping_add(EVAL_SEED_OFFSET));
    let (episode, webster_events) = evaluate(cfg, &spec, trained.as_ref().map(|t| &t.bundle))?;
    Ok(SeedOutcome { config_id: cfg.config_id(), seed, episode, trained, webster_events })
}

/// All (configuration, seed) jobs, run concurrently, results in input order.
pub fn run_grid(cfgs: &[ExperimentConfig]) -> Result<Vec<SeedOutcome>, HarnessError> {
    for c in cfgs {
        c.validate()?;
    }
    let jobs: Vec<(&ExperimentConfig, u64)> = cfgs.iter().flat_map(|c| c.seeds.iter().map(move |&s| (c, s))).collect();
    par::map(&jobs, |(c, s)| run_seed(c, *s)).into_iter().collect()
}
