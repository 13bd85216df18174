//! Reward formulations scoring one decision interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::sim::{LaneObservables, NUM_APPROACHES, NUM_LANES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    Queue,
    Delay,
    Pressure,
    Speed,
    RescoWait,
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardKind::Queue => "queue",
            RewardKind::Delay => "delay",
            RewardKind::Pressure => "pressure",
            RewardKind::Speed => "speed",
            RewardKind::RescoWait => "rescowait",
        })
    }
}

impl FromStr for RewardKind {
    type Err = RewardError;

    fn from_str(s: &str) -> Result<Self, RewardError> {
        match s {
            "queue" => Ok(RewardKind::Queue),
            "delay" => Ok(RewardKind::Delay),
            "pressure" => Ok(RewardKind::Pressure),
            "speed" => Ok(RewardKind::Speed),
            "rescowait" | "resco" | "wait" => Ok(RewardKind::RescoWait),
            _ => Err(RewardError(format!("unknown reward '{s}'"))),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("reward config: {0}")]
pub struct RewardError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSpec {
    pub kind: RewardKind,
    pub alpha_abs: f64,
    pub alpha_red: f64,
    pub q_norm: f64,
    pub resco_alpha: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        RewardSpec { kind: RewardKind::Queue, alpha_abs: 0.4, alpha_red: 0.6, q_norm: 25.0, resco_alpha: 100.0, r_min: -4.0, r_max: 4.0 }
    }
}

impl RewardSpec {
    pub fn of_kind(kind: RewardKind) -> Self {
        RewardSpec { kind, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        if (self.alpha_abs + self.alpha_red - 1.0).abs() > 1e-12 {
            return Err(RewardError(format!("alpha_abs + alpha_red = {}, expected 1", self.alpha_abs + self.alpha_red)));
        }
        if !(self.q_norm > 0.0) {
            return Err(RewardError("q_norm must be positive".into()));
        }
        if !(self.resco_alpha > 0.0) {
            return Err(RewardError("resco_alpha must be positive".into()));
        }
        if !(self.r_min < self.r_max) {
            return Err(RewardError("r_min must be below r_max".into()));
        }
        Ok(())
    }
}

/// Weighted penalty on current approach queues plus credit for reducing them
/// since the previous decision point.
pub fn queue_reward(q_now: &[f64; NUM_APPROACHES], q_prev: &[f64; NUM_APPROACHES], spec: &RewardSpec) -> f64 {
    let scale = NUM_APPROACHES as f64 * spec.q_norm;
    let total: f64 = q_now.iter().sum();
    let reduction: f64 = q_prev.iter().zip(q_now).map(|(p, n)| p - n).sum();
    spec.alpha_abs * (-total / scale) + spec.alpha_red * (reduction / scale)
}

/// Drop in the lane-averaged accumulated delay.
pub fn delay_reward(w_prev: f64, w_now: f64) -> f64 {
    w_prev - w_now
}

/// Lane-averaged accumulated waiting time.
pub fn mean_lane_wait(obs: &[LaneObservables; NUM_LANES]) -> f64 {
    obs.iter().map(|o| o.total_wait_s).sum::<f64>() / NUM_LANES as f64
}

/// Negated total pressure so that rewarding balanced flow lowers pressure.
pub fn pressure_reward(inflow: &[f64; NUM_LANES], outflow: &[f64; NUM_LANES]) -> f64 {
    -inflow.iter().zip(outflow).map(|(i, o)| i - o).sum::<f64>()
}

/// Mean speed over `vehicles` vehicles; zero on an empty network.
pub fn speed_reward(sum_speeds: f64, vehicles: usize) -> f64 {
    if vehicles == 0 {
        0.0
    } else {
        sum_speeds / vehicles as f64
    }
}

/// Scaled, clipped negative total waiting time.
pub fn resco_wait_reward(total_wait: f64, spec: &RewardSpec) -> f64 {
    (-total_wait / spec.resco_alpha).clamp(spec.r_min, spec.r_max)
}

/// Detector readings at the two ends of a decision interval plus per-tick
/// flow counts summed across it.
#[derive(Debug, Clone)]
pub struct IntervalSummary {
    pub queues_prev: [usize; NUM_APPROACHES],
    pub queues_now: [usize; NUM_APPROACHES],
    pub lanes_prev: [LaneObservables; NUM_LANES],
    pub lanes_now: [LaneObservables; NUM_LANES],
    pub inflow: [f64; NUM_LANES],
    pub outflow: [f64; NUM_LANES],
}

/// Scores an interval under `spec.kind`.
pub fn evaluate(spec: &RewardSpec, s: &IntervalSummary) -> f64 {
    match spec.kind {
        RewardKind::Queue => {
            queue_reward(&s.queues_now.map(|q| q as f64), &s.queues_prev.map(|q| q as f64), spec)
        }
        RewardKind::Delay => delay_reward(mean_lane_wait(&s.lanes_prev), mean_lane_wait(&s.lanes_now)),
        RewardKind::Pressure => pressure_reward(&s.inflow, &s.outflow),
        RewardKind::Speed => {
            let sum: f64 = s.lanes_now.iter().map(|o| o.sum_speeds_mps).sum();
            let n: usize = s.lanes_now.iter().map(|o| o.approaching_count + o.queue_length).sum();
            speed_reward(sum, n)
        }
        RewardKind::RescoWait => {
            resco_wait_reward(s.lanes_now.iter().map(|o| o.total_wait_s).sum(), spec)
        }
    }
}
