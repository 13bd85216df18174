use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::Controller;
use crate::nn::{argmax, softmax_sample, Mlp};
use crate::repr::{KPlanesParams, Normalizer, ReprKind, Representation};
use crate::sim::{PhasePlan, SimState};
use crate::weights::{FileKind, Section, WeightFile};

use super::env::{Encoder, LANE_FEATURES_DIM};
use super::AgentError;

/// How a policy turns the simulator state into its input vector.
#[derive(Debug, Clone, PartialEq)]
pub enum ObsEncoding {
    Repr { repr: Representation, norm: Normalizer },
    /// Per-lane detector features (used by the DQN baseline).
    Lanes,
}

impl ObsEncoding {
    pub fn dim(&self) -> usize {
        match self {
            ObsEncoding::Repr { repr, .. } => repr.dim(),
            ObsEncoding::Lanes => LANE_FEATURES_DIM,
        }
    }

    pub fn id(&self) -> String {
        match self {
            ObsEncoding::Repr { repr, .. } => repr.kind().to_string(),
            ObsEncoding::Lanes => "lanes".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Ppo,
    Dqn,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Ppo => "ppo",
            Algo::Dqn => "dqn",
        })
    }
}

/// How an evaluated policy turns its network output into an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionSelection {
    /// Highest logit / action value.
    #[default]
    Greedy,
    /// Draw from the softmax of the logits with a seeded generator.
    Sample,
}

impl FromStr for ActionSelection {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, AgentError> {
        match s {
            "greedy" => Ok(ActionSelection::Greedy),
            "sample" => Ok(ActionSelection::Sample),
            _ => Err(AgentError::Config(format!("unknown action selection '{s}' (greedy | sample)"))),
        }
    }
}

/// Everything needed to run a trained policy: its network, the encoding
/// that feeds it, and (for PPO) the value head kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyBundle {
    pub algo: Algo,
    pub encoding: ObsEncoding,
    /// Action logits (PPO) or action values (DQN).
    pub policy: Mlp,
    pub value: Option<Mlp>,
    pub seed: u64,
}

fn malformed(msg: impl Into<String>) -> AgentError {
    AgentError::Weights(crate::weights::WeightsError::Malformed(msg.into()))
}

impl PolicyBundle {
    /// Header tag: `<algo>:<encoding id>`.
    pub fn tag(&self) -> String {
        format!("{}:{}", self.algo, self.encoding.id())
    }

    pub fn to_weight_file(&self) -> WeightFile {
        let mut f = WeightFile::new(FileKind::PolicyBundle, self.seed, self.tag());
        f.push_network("policy", &self.policy);
        if let Some(v) = &self.value {
            f.push_network("value", v);
        }
        if let ObsEncoding::Repr { repr, norm } = &self.encoding {
            f.sections.push(Section {
                name: "normalizer".into(),
                dims: vec![4],
                meta: vec![],
                values: [norm.queue_max, norm.green_max, norm.cycle_max, norm.cycles_max].map(|x| x as f32).to_vec(),
            });
            match repr {
                Representation::Latent(enc) => f.push_network("encoder", enc),
                Representation::KPlanes(kp) => {
                    let mut planes = kp.to_weight_file();
                    f.sections.append(&mut planes.sections);
                    let s = kp.seed();
                    f.sections.push(Section {
                        name: "kplanes_seed".into(),
                        dims: vec![],
                        meta: vec![s as u32, (s >> 32) as u32],
                        values: vec![],
                    });
                }
                Representation::Baseline | Representation::Expanded => {}
            }
        }
        f
    }

    pub fn from_weight_file(f: &WeightFile) -> Result<Self, AgentError> {
        if f.kind != FileKind::PolicyBundle {
            return Err(malformed("not a policy bundle"));
        }
        let (algo, enc) = f.tag.split_once(':').ok_or_else(|| malformed(format!("bad tag '{}'", f.tag)))?;
        let algo = match algo {
            "ppo" => Algo::Ppo,
            "dqn" => Algo::Dqn,
            other => return Err(malformed(format!("unknown algorithm '{other}'"))),
        };
        let encoding = if enc == "lanes" {
            ObsEncoding::Lanes
        } else {
            let kind: ReprKind = enc.parse()?;
            let n = f.section("normalizer").ok_or_else(|| malformed("missing normalizer"))?;
            let v: Vec<f64> = n.values.iter().map(|&x| x as f64).collect();
            let norm = match v.as_slice() {
                [q, g, c, k] => Normalizer { queue_max: *q, green_max: *g, cycle_max: *c, cycles_max: *k },
                _ => return Err(malformed("normalizer needs 4 values")),
            };
            let repr = match kind {
                ReprKind::Baseline => Representation::Baseline,
                ReprKind::Expanded => Representation::Expanded,
                ReprKind::Latent(_) => Representation::Latent(f.network("encoder")?),
                ReprKind::KPlanes => {
                    let mut planes = WeightFile::new(FileKind::Planes, 0, "kplanes");
                    if let Some(s) = f.section("kplanes_seed") {
                        if let [lo, hi] = s.meta.as_slice() {
                            planes.seed = (*lo as u64) | ((*hi as u64) << 32);
                        }
                    }
                    planes.sections.extend(f.section("planes").cloned());
                    Representation::KPlanes(KPlanesParams::from_weight_file(&planes)?)
                }
            };
            ObsEncoding::Repr { repr, norm }
        };
        let policy = f.network("policy")?;
        if policy.input_dim() != encoding.dim() {
            return Err(malformed(format!(
                "policy input {} does not match encoding dim {}",
                policy.input_dim(),
                encoding.dim()
            )));
        }
        let value = f.section("value").map(|_| f.network("value")).transpose()?;
        Ok(PolicyBundle { algo, encoding, policy, value, seed: f.seed })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AgentError> {
        Ok(self.to_weight_file().save(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AgentError> {
        Self::from_weight_file(&WeightFile::load(path)?)
    }

    /// Greedy controller using the stored encoding unchanged.
    pub fn controller(&self) -> Result<PolicyController, AgentError> {
        Ok(PolicyController {
            encoder: Encoder::new(&self.encoding)?,
            bundle: self.clone(),
            selection: ActionSelection::Greedy,
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    /// Evaluation controller for a run of `horizon_s` seconds: the
    /// cycle-count feature is rescaled to that horizon rather than the
    /// training run's, and sampled actions come from a generator seeded
    /// with `seed`.
    pub fn controller_for_horizon(
        &self,
        horizon_s: u64,
        plan: &PhasePlan,
        selection: ActionSelection,
        seed: u64,
    ) -> Result<PolicyController, AgentError> {
        let encoding = match &self.encoding {
            ObsEncoding::Repr { repr, norm } => ObsEncoding::Repr {
                repr: repr.clone(),
                norm: Normalizer { cycles_max: Normalizer::for_horizon(horizon_s, plan).cycles_max, ..*norm },
            },
            ObsEncoding::Lanes => ObsEncoding::Lanes,
        };
        Ok(PolicyController {
            encoder: Encoder::new(&encoding)?,
            bundle: self.clone(),
            selection,
            rng: ChaCha8Rng::seed_from_u64(super::derive_seed(seed, 41)),
        })
    }
}

/// Acts on the bundle's network output, greedily or by sampling.
#[derive(Debug, Clone)]
pub struct PolicyController {
    bundle: PolicyBundle,
    encoder: Encoder,
    selection: ActionSelection,
    rng: ChaCha8Rng,
}

impl PolicyController {
    pub fn bundle(&self) -> &PolicyBundle {
        &self.bundle
    }
}

impl Controller for PolicyController {
    fn name(&self) -> String {
        self.bundle.tag()
    }

    fn reset(&mut self, _sim: &SimState) {
        self.encoder.reset();
    }

    fn decide(&mut self, sim: &SimState) -> usize {
        let obs = self.encoder.observe(sim);
        let out = self.bundle.policy.forward(&obs).expect("input size checked when the bundle was built");
        match self.selection {
            ActionSelection::Greedy => argmax(&out),
            // a non-finite logit cannot be sampled; fall back to the argmax
            ActionSelection::Sample => softmax_sample(&out, &mut self.rng).map_or_else(|_| argmax(&out), |s| s.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{actor_critic_sizes, Activation, TANH_TRUNK};

    fn round_trip(b: &PolicyBundle) -> PolicyBundle {
        let mut buf = Vec::new();
        b.to_weight_file().write_to(&mut buf).unwrap();
        PolicyBundle::from_weight_file(&WeightFile::read_from(buf.as_slice()).unwrap()).unwrap()
    }

    // f32 storage: parameters drawn from f32 survive exactly
    fn f32_net(sizes: &[usize], acts: &[Activation], seed: u64) -> Mlp {
        let mut net = Mlp::new(sizes, acts, 1.0, seed).unwrap();
        net.params_mut().iter_mut().for_each(|p| *p = *p as f32 as f64);
        net
    }

    #[test]
    fn kplanes_bundle_round_trip() {
        let b = PolicyBundle {
            algo: Algo::Ppo,
            encoding: ObsEncoding::Repr {
                repr: Representation::KPlanes(KPlanesParams::new(0x1234_5678_9abc)),
                norm: Normalizer::default(),
            },
            policy: f32_net(&actor_critic_sizes(68, 3), &TANH_TRUNK, 1),
            value: Some(f32_net(&actor_critic_sizes(68, 1), &TANH_TRUNK, 2)),
            seed: 9,
        };
        assert_eq!(b.tag(), "ppo:kplanes");
        assert_eq!(round_trip(&b), b);
    }

    #[test]
    fn latent_and_lane_bundles_round_trip() {
        let enc = f32_net(&[19, 32, 8], &[Activation::Relu, Activation::Linear], 3);
        let b = PolicyBundle {
            algo: Algo::Ppo,
            encoding: ObsEncoding::Repr { repr: Representation::Latent(enc), norm: Normalizer::default() },
            policy: f32_net(&actor_critic_sizes(8, 3), &TANH_TRUNK, 4),
            value: None,
            seed: 1,
        };
        assert_eq!(round_trip(&b), b);
        let d = PolicyBundle {
            algo: Algo::Dqn,
            encoding: ObsEncoding::Lanes,
            policy: f32_net(&[LANE_FEATURES_DIM, 64, 64, 3], &[Activation::Relu, Activation::Relu, Activation::Linear], 5),
            value: None,
            seed: 2,
        };
        assert_eq!(round_trip(&d), d);
    }

    #[test]
    fn mismatched_policy_rejected() {
        let b = PolicyBundle {
            algo: Algo::Ppo,
            encoding: ObsEncoding::Repr { repr: Representation::Expanded, norm: Normalizer::default() },
            policy: f32_net(&actor_critic_sizes(8, 3), &TANH_TRUNK, 4),
            value: None,
            seed: 1,
        };
        assert!(PolicyBundle::from_weight_file(&b.to_weight_file()).is_err());
    }
}
