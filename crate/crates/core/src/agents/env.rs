use crate::metrics::CycleTracker;
use crate::repr::{Normalizer, Observer, Representation};
use crate::rewards::{evaluate, IntervalSummary, RewardSpec};
use crate::sim::{
    phase_of_lane, Action, FlowProfile, IntersectionLayout, LaneObservables, PhasePlan, SimState, NUM_APPROACHES,
    NUM_LANES, NUM_PHASES,
};

use super::bundle::ObsEncoding;
use super::{AgentError, Environment, Transition};

/// Five detector features per lane plus the active-phase one-hot.
pub const LANE_FEATURES_DIM: usize = NUM_LANES * 5 + NUM_PHASES;

/// Per-lane detector vector: served-by-active-phase flag, approaching count,
/// accumulated wait, queue length and summed speed, each scaled to roughly
/// unit range, followed by the phase one-hot.
pub fn lane_features(sim: &SimState) -> Vec<f64> {
    let cap = sim.layout().lane_storage_capacity as f64;
    let speed_scale = cap * sim.layout().free_flow_speed_mps;
    let obs = sim.lane_observables();
    let mut out = Vec::with_capacity(LANE_FEATURES_DIM);
    for (l, o) in obs.iter().enumerate() {
        let active = phase_of_lane(l) == sim.current_phase() && !sim.in_yellow();
        out.push(active as u8 as f64);
        out.push(o.approaching_count as f64 / cap);
        out.push(o.total_wait_s / (cap * 100.0));
        out.push(o.queue_length as f64 / cap);
        out.push(o.sum_speeds_mps / speed_scale);
    }
    out.extend((0..NUM_PHASES).map(|p| (p == sim.current_phase()) as u8 as f64));
    out
}

/// Observation state carried between decision points.
#[derive(Debug, Clone)]
pub(crate) enum Encoder {
    Repr(Observer),
    Lanes,
}

impl Encoder {
    pub(crate) fn new(enc: &ObsEncoding) -> Result<Self, AgentError> {
        Ok(match enc {
            ObsEncoding::Repr { repr, norm } => Encoder::Repr(Observer::new(repr.clone(), *norm)?),
            ObsEncoding::Lanes => Encoder::Lanes,
        })
    }

    pub(crate) fn reset(&mut self) {
        if let Encoder::Repr(o) = self {
            o.reset();
        }
    }

    pub(crate) fn observe(&mut self, sim: &SimState) -> Vec<f64> {
        match self {
            Encoder::Repr(o) => o.observe(sim),
            Encoder::Lanes => lane_features(sim),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub layout: IntersectionLayout,
    pub plan: PhasePlan,
    pub flows: FlowProfile,
    pub reward: RewardSpec,
    pub seed: u64,
}

impl EnvConfig {
    pub fn new(flows: FlowProfile, reward: RewardSpec, seed: u64) -> Self {
        EnvConfig { layout: IntersectionLayout::default(), plan: PhasePlan::default(), flows, reward, seed }
    }
}

/// The intersection as a continuing decision process: one step runs from a
/// decision point to the next.
#[derive(Debug, Clone)]
pub struct TscEnv {
    cfg: EnvConfig,
    encoding: ObsEncoding,
    encoder: Encoder,
    sim: SimState,
    tracker: CycleTracker,
    prev_queues: [usize; NUM_APPROACHES],
    prev_lanes: [LaneObservables; NUM_LANES],
}

impl TscEnv {
    pub fn new(cfg: EnvConfig, encoding: ObsEncoding) -> Result<Self, AgentError> {
        cfg.reward.validate()?;
        let sim = SimState::new(cfg.layout.clone(), cfg.plan.clone(), cfg.flows.clone(), cfg.seed)?;
        Ok(TscEnv {
            encoder: Encoder::new(&encoding)?,
            encoding,
            cfg,
            sim,
            tracker: CycleTracker::new(),
            prev_queues: [0; NUM_APPROACHES],
            prev_lanes: [LaneObservables::default(); NUM_LANES],
        })
    }

    /// Expanded-state environment with the default normalizer.
    pub fn expanded(cfg: EnvConfig) -> Result<Self, AgentError> {
        Self::new(cfg, ObsEncoding::Repr { repr: Representation::Expanded, norm: Normalizer::default() })
    }

    pub fn sim(&self) -> &SimState {
        &self.sim
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn encoding(&self) -> &ObsEncoding {
        &self.encoding
    }

    fn snapshot(&mut self) {
        self.prev_queues = self.sim.approach_queues();
        self.prev_lanes = self.sim.lane_observables();
    }
}

impl Environment for TscEnv {
    fn obs_dim(&self) -> usize {
        self.encoding.dim()
    }

    fn num_actions(&self) -> usize {
        Action::ALL.len()
    }

    fn reset(&mut self) -> Result<Vec<f64>, AgentError> {
        let c = &self.cfg;
        self.sim = SimState::new(c.layout.clone(), c.plan.clone(), c.flows.clone(), c.seed)?;
        self.encoder.reset();
        self.tracker = CycleTracker::new();
        while !self.sim.is_decision_point() {
            let r = self.sim.step();
            let flows = &self.cfg.flows;
            self.tracker.push(&r, |t| flows.regime_at(t));
        }
        self.snapshot();
        Ok(self.encoder.observe(&self.sim))
    }

    fn step(&mut self, action: usize) -> Result<Transition, AgentError> {
        self.sim.apply_action(action)?;
        let start = self.sim.clock();
        let mut inflow = [0.0; NUM_LANES];
        let mut outflow = [0.0; NUM_LANES];
        let mut cycles = Vec::new();
        loop {
            let r = self.sim.step();
            for l in 0..NUM_LANES {
                inflow[l] += r.arrivals[l] as f64;
                outflow[l] += r.discharges[l] as f64;
            }
            let flows = &self.cfg.flows;
            cycles.extend(self.tracker.push(&r, |t| flows.regime_at(t)));
            if self.sim.is_decision_point() {
                break;
            }
        }
        let summary = IntervalSummary {
            queues_prev: self.prev_queues,
            queues_now: self.sim.approach_queues(),
            lanes_prev: self.prev_lanes,
            lanes_now: self.sim.lane_observables(),
            inflow,
            outflow,
        };
        let reward = evaluate(&self.cfg.reward, &summary);
        self.snapshot();
        Ok(Transition { obs: self.encoder.observe(&self.sim), reward, elapsed_s: self.sim.clock() - start, cycles })
    }
}
