//! Observation encodings handed to controllers.

mod expanded;
mod planes;

use std::fmt;
use std::str::FromStr;

pub use expanded::{baseline_state, expanded_state, ExpandedState19, Normalizer, BASELINE_DIM, EXPANDED_DIM};
pub use planes::{
    bilinear_sample, feature_pairs, KPlanesParams, Plane, DELTA_GROUP, GREEN_GROUP, GROUP_DIMS, KPLANES_DIM,
    KPLANES_FEATURES, KPLANES_RESOLUTION, PHASE_GROUP, QUEUE_GROUP, TIME_GROUP,
};

use crate::nn::Mlp;
use crate::sim::{SimState, NUM_APPROACHES};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReprError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("representation config: {0}")]
    Config(String),
}

/// Latent sizes the autoencoder is normally trained with.
pub const LATENT_DIMS: [usize; 5] = [4, 8, 16, 19, 32];

/// Representation named on the command line and in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReprKind {
    Baseline,
    Expanded,
    Latent(usize),
    KPlanes,
}

impl ReprKind {
    pub fn needs_encoder(self) -> bool {
        matches!(self, ReprKind::Latent(_))
    }
}

impl fmt::Display for ReprKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReprKind::Baseline => write!(f, "baseline"),
            ReprKind::Expanded => write!(f, "expanded"),
            ReprKind::Latent(k) => write!(f, "ae{k}"),
            ReprKind::KPlanes => write!(f, "kplanes"),
        }
    }
}

impl FromStr for ReprKind {
    type Err = ReprError;

    fn from_str(s: &str) -> Result<Self, ReprError> {
        match s {
            "baseline" => Ok(ReprKind::Baseline),
            "expanded" => Ok(ReprKind::Expanded),
            "kplanes" => Ok(ReprKind::KPlanes),
            _ => s
                .strip_prefix("ae")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| *k > 0)
                .map(ReprKind::Latent)
                .ok_or_else(|| ReprError::Config(format!("unknown representation '{s}'"))),
        }
    }
}

/// Latent code of a trained encoder.
pub fn encode(encoder: &Mlp, s: &ExpandedState19) -> Result<Vec<f64>, ReprError> {
    if encoder.input_dim() != EXPANDED_DIM {
        return Err(ReprError::Dimension { expected: EXPANDED_DIM, got: encoder.input_dim() });
    }
    encoder
        .forward(&s.to_array())
        .map_err(|_| ReprError::Dimension { expected: EXPANDED_DIM, got: encoder.input_dim() })
}

/// Fully built encoding with any fixed parameters it needs.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Baseline,
    Expanded,
    Latent(Mlp),
    KPlanes(KPlanesParams),
}

impl Representation {
    pub fn dim(&self) -> usize {
        match self {
            Representation::Baseline => BASELINE_DIM,
            Representation::Expanded => EXPANDED_DIM,
            Representation::Latent(enc) => enc.output_dim(),
            Representation::KPlanes(kp) => kp.output_dim(),
        }
    }

    pub fn kind(&self) -> ReprKind {
        match self {
            Representation::Baseline => ReprKind::Baseline,
            Representation::Expanded => ReprKind::Expanded,
            Representation::Latent(enc) => ReprKind::Latent(enc.output_dim()),
            Representation::KPlanes(_) => ReprKind::KPlanes,
        }
    }
}

/// Builds observations at successive decision points; remembers the approach
/// queues of the previous call for the queue-change features.
#[derive(Debug, Clone)]
pub struct Observer {
    repr: Representation,
    norm: Normalizer,
    prev_queues: [usize; NUM_APPROACHES],
}

impl Observer {
    pub fn new(repr: Representation, norm: Normalizer) -> Result<Self, ReprError> {
        if let Representation::Latent(enc) = &repr {
            if enc.input_dim() != EXPANDED_DIM {
                return Err(ReprError::Dimension { expected: EXPANDED_DIM, got: enc.input_dim() });
            }
        }
        Ok(Observer { repr, norm, prev_queues: [0; NUM_APPROACHES] })
    }

    pub fn dim(&self) -> usize {
        self.repr.dim()
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn reset(&mut self) {
        self.prev_queues = [0; NUM_APPROACHES];
    }

    /// Encoding of the current state. Advances the queue-change reference,
    /// so call it once per decision point.
    pub fn observe(&mut self, sim: &SimState) -> Vec<f64> {
        let out = self.peek(sim);
        self.prev_queues = sim.approach_queues();
        out
    }

    /// Encoding of the current state without advancing the reference.
    pub fn peek(&self, sim: &SimState) -> Vec<f64> {
        let expanded = || expanded_state(sim, &self.prev_queues, &self.norm);
        match &self.repr {
            Representation::Baseline => baseline_state(sim).to_vec(),
            Representation::Expanded => expanded().to_array().to_vec(),
            Representation::Latent(enc) => encode(enc, &expanded()).expect("encoder input checked at construction"),
            Representation::KPlanes(kp) => kp.transform(&expanded()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Mlp};
    use crate::sim::{FlowProfile, IntersectionLayout, PhasePlan};

    #[test]
    fn repr_kind_parsing() {
        assert_eq!("ae16".parse::<ReprKind>().unwrap(), ReprKind::Latent(16));
        assert_eq!("kplanes".parse::<ReprKind>().unwrap(), ReprKind::KPlanes);
        assert!("ae".parse::<ReprKind>().is_err());
        assert!("ae0".parse::<ReprKind>().is_err());
        assert!("pixels".parse::<ReprKind>().is_err());
        assert_eq!(ReprKind::Latent(8).to_string(), "ae8");
    }

    #[test]
    fn encoder_output_length_and_zero_weights() {
        let enc = Mlp::new(&[19, 32, 16], &[Activation::Relu, Activation::Linear], 1.0, 0).unwrap();
        let s = ExpandedState19::from_array(&[0.3; 19]);
        let z = encode(&enc, &s).unwrap();
        assert_eq!(z.len(), 16);
        assert_eq!(z, encode(&enc, &s).unwrap());
        let zero = Mlp::zeros(&[19, 32, 8], &[Activation::Relu, Activation::Linear]).unwrap();
        assert_eq!(encode(&zero, &s).unwrap(), vec![0.0; 8]);
    }

    #[test]
    fn encoder_dimension_mismatch() {
        let enc = Mlp::zeros(&[12, 4], &[Activation::Linear]).unwrap();
        let s = ExpandedState19::from_array(&[0.0; 19]);
        assert_eq!(encode(&enc, &s), Err(ReprError::Dimension { expected: 19, got: 12 }));
        assert!(Observer::new(Representation::Latent(enc), Normalizer::default()).is_err());
    }

    #[test]
    fn observer_dims_and_purity() {
        let sim = SimState::new(IntersectionLayout::default(), PhasePlan::default(), FlowProfile::synthetic(), 4).unwrap();
        for (repr, dim) in [
            (Representation::Baseline, 8),
            (Representation::Expanded, 19),
            (Representation::KPlanes(KPlanesParams::new(0)), 68),
        ] {
            let mut obs = Observer::new(repr, Normalizer::default()).unwrap();
            let a = obs.peek(&sim);
            assert_eq!(a.len(), dim);
            assert_eq!(obs.observe(&sim), a);
            assert_eq!(obs.dim(), dim);
        }
    }
}
