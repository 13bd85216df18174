use crate::control::Controller;
use crate::metrics::{CycleRecord, CycleTracker};
use crate::sim::{Event, FlowProfile, IntersectionLayout, PhasePlan, SimState, NUM_LANES};

use super::HarnessError;

/// One evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub layout: IntersectionLayout,
    pub plan: PhasePlan,
    pub flows: FlowProfile,
    pub horizon_s: u64,
    pub seed: u64,
    /// Keep the per-tick queue log.
    pub record_ticks: bool,
    /// Keep the vehicle event log.
    pub record_events: bool,
}

impl EpisodeSpec {
    pub fn new(flows: FlowProfile, horizon_s: u64, seed: u64) -> Self {
        EpisodeSpec {
            layout: IntersectionLayout::default(),
            plan: PhasePlan::default(),
            flows,
            horizon_s,
            seed,
            record_ticks: false,
            record_events: false,
        }
    }
}

/// Signal state and lane queues after one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRow {
    pub clock: u64,
    /// Cycle the tick belongs to.
    pub cycle: u64,
    pub phase: usize,
    pub in_yellow: bool,
    pub queues: [usize; NUM_LANES],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Completed cycles; a cycle cut off by the horizon is dropped.
    pub cycles: Vec<CycleRecord>,
    pub ticks: Vec<TickRow>,
    pub events: Vec<Event>,
    pub decisions: u64,
}

impl EpisodeResult {
    /// Mean `Q_cycle` over the completed cycles (0 when there are none).
    pub fn mean_q_cycle(&self) -> f64 {
        if self.cycles.is_empty() {
            return 0.0;
        }
        self.cycles.iter().map(|c| c.q_cycle as f64).sum::<f64>() / self.cycles.len() as f64
    }
}

/// Simulates `spec.horizon_s` seconds, asking `ctl` for an action at every
/// decision point and closing a [`CycleRecord`] at every cycle wrap.
pub fn run_episode(spec: &EpisodeSpec, ctl: &mut dyn Controller) -> Result<EpisodeResult, HarnessError> {
    spec.flows.validate_horizon(spec.horizon_s)?;
    let mut sim = SimState::new(spec.layout.clone(), spec.plan.clone(), spec.flows.clone(), spec.seed)?;
    if spec.record_events {
        sim = sim.with_event_log();
    }
    ctl.reset(&sim);
    let mut tracker = CycleTracker::new();
    let mut cycles = Vec::new();
    let mut ticks = Vec::new();
    let mut decisions = 0;
    while sim.clock() < spec.horizon_s {
        if sim.is_decision_point() {
            let a = ctl.decide(&sim);
            sim.apply_action(a)?;
            decisions += 1;
        }
        let cycle = sim.cycles_completed();
        let report = sim.step();
        if spec.record_ticks {
            ticks.push(TickRow {
                clock: report.clock,
                cycle,
                phase: sim.current_phase(),
                in_yellow: sim.in_yellow(),
                queues: report.queues,
            });
        }
        ctl.on_tick(&mut sim, &report);
        cycles.extend(tracker.push(&report, |t| spec.flows.regime_at(t)));
    }
    Ok(EpisodeResult { cycles, ticks, events: sim.events().to_vec(), decisions })
}
