use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{ActionSelection, AeConfig, BufferConfig, DqnConfig, PpoConfig};
use crate::baselines::WebsterConfig;
use crate::repr::ReprKind;
use crate::rewards::RewardSpec;
use crate::sim::{FlowProfile, IntersectionLayout, PhasePlan};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Fixed,
    Webster,
    Ppo,
    Dqn,
}

impl ControllerKind {
    pub fn is_learned(self) -> bool {
        matches!(self, ControllerKind::Ppo | ControllerKind::Dqn)
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControllerKind::Fixed => "fixed",
            ControllerKind::Webster => "webster",
            ControllerKind::Ppo => "ppo",
            ControllerKind::Dqn => "dqn",
        })
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "fixed" => Ok(ControllerKind::Fixed),
            "webster" => Ok(ControllerKind::Webster),
            "ppo" => Ok(ControllerKind::Ppo),
            "dqn" => Ok(ControllerKind::Dqn),
            _ => Err(HarnessError::Usage(format!("unknown controller '{s}'"))),
        }
    }
}

/// One experiment: a controller (with its representation and reward when
/// learned) evaluated over several seeds. Every field has a default, so a
/// config file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Row label in summaries; derived from the controller when absent.
    pub id: Option<String>,
    pub controller: ControllerKind,
    /// baseline | expanded | aeK | kplanes
    pub repr: String,
    pub seeds: Vec<u64>,
    /// Evaluation horizon in simulated seconds.
    pub horizon_s: u64,
    /// Multiplier on the built-in hour-long demand profile.
    pub flow_scale: f64,
    /// Explicit demand schedule; replaces the built-in profile.
    pub flows: Option<FlowProfile>,
    pub out_dir: Option<PathBuf>,
    /// Trained policy bundle; when set, no training happens.
    pub weights: Option<PathBuf>,
    /// Pretrained autoencoder for latent representations.
    pub encoder: Option<PathBuf>,
    /// Grid seed of the factorized-plane transform; the run seed when absent.
    pub kplanes_seed: Option<u64>,
    /// How a learned policy picks actions at evaluation.
    pub eval_actions: ActionSelection,
    pub layout: IntersectionLayout,
    pub plan: PhasePlan,
    pub reward: RewardSpec,
    pub ppo: PpoConfig,
    pub dqn: DqnConfig,
    pub ae: AeConfig,
    pub buffer: BufferConfig,
    pub webster: WebsterConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            id: None,
            controller: ControllerKind::Fixed,
            repr: "expanded".into(),
            seeds: vec![0, 1, 2, 3, 4],
            horizon_s: 7200,
            flow_scale: 1.0,
            flows: None,
            out_dir: None,
            weights: None,
            encoder: None,
            kplanes_seed: None,
            eval_actions: ActionSelection::Greedy,
            layout: IntersectionLayout::default(),
            plan: PhasePlan::default(),
            reward: RewardSpec::default(),
            ppo: PpoConfig::default(),
            dqn: DqnConfig::default(),
            ae: AeConfig::default(),
            buffer: BufferConfig::default(),
            webster: WebsterConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn repr_kind(&self) -> Result<ReprKind, HarnessError> {
        Ok(self.repr.parse()?)
    }

    pub fn flow_profile(&self) -> FlowProfile {
        self.flows.clone().unwrap_or_else(|| FlowProfile::synthetic_scaled(self.flow_scale))
    }

    pub fn config_id(&self) -> String {
        if let Some(id) = &self.id {
            return id.clone();
        }
        match self.controller {
            ControllerKind::Fixed => "fixed".into(),
            ControllerKind::Webster => "webster".into(),
            ControllerKind::Ppo => format!("ppo-{}-{}", self.repr, self.reward.kind),
            ControllerKind::Dqn => "dqn".into(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        self.layout.validate()?;
        self.plan.validate()?;
        if self.horizon_s < self.plan.max_cycle_s() as u64 {
            return Err(HarnessError::Config(format!(
                "horizon {} s is shorter than the longest cycle ({} s)",
                self.horizon_s,
                self.plan.max_cycle_s()
            )));
        }
        if !(self.flow_scale >= 0.0 && self.flow_scale.is_finite()) {
            return Err(HarnessError::Config("flow_scale must be a finite non-negative number".into()));
        }
        self.flow_profile().validate_horizon(self.horizon_s)?;
        self.reward.validate()?;
        let repr = self.repr_kind()?;
        match self.controller {
            ControllerKind::Ppo => {
                self.ppo.validate()?;
                // catch a bad latent size before any simulation runs
                if let (ReprKind::Latent(k), None) = (repr, &self.encoder) {
                    AeConfig { latent: k, ..self.ae.clone() }.validate()?;
                }
            }
            ControllerKind::Dqn => self.dqn.validate()?,
            ControllerKind::Fixed | ControllerKind::Webster => {}
        }
        Ok(())
    }
}

/// Several experiments compared on common seeds and horizon. Grid-level
/// values, when present, override the entries so the comparison is fair.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub seeds: Option<Vec<u64>>,
    pub horizon_s: Option<u64>,
    pub flow_scale: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub experiment: Vec<ExperimentConfig>,
}

impl GridConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Entries with the grid-level overrides applied.
    pub fn resolved(&self) -> Result<Vec<ExperimentConfig>, HarnessError> {
        if self.experiment.is_empty() {
            return Err(HarnessError::Config("grid has no [[experiment]] entries".into()));
        }
        let mut out = Vec::new();
        for e in &self.experiment {
            let mut e = e.clone();
            if let Some(s) = &self.seeds {
                e.seeds = s.clone();
            }
            if let Some(h) = self.horizon_s {
                e.horizon_s = h;
            }
            if let Some(f) = self.flow_scale {
                e.flow_scale = f;
            }
            e.validate()?;
            out.push(e);
        }
        Ok(out)
    }
}
