//! Point-queue simulation of one four-phase signalized intersection.
//!
//! Vehicles enter each of the eight lanes as a Poisson stream, travel at
//! free-flow speed to the stop line, and either pass an idle green lane or
//! stack in a vertical queue that discharges at one vehicle per saturation
//! headway once the startup lost time has elapsed. The signal runs a fixed
//! four-phase sequence whose greens an external controller may cut short or
//! extend at decision points.

mod events;
mod flow;
mod layout;
mod plan;
mod state;

pub use events::{write_events_csv, Event, EventKind};
pub use flow::{FlowProfile, FlowSegment, Regime, HIGH_DEMAND_VPH};
pub use layout::{
    phase_of_lane, Approach, IntersectionLayout, LaneId, LANES_PER_APPROACH, NUM_APPROACHES, NUM_LANES,
    NUM_PHASES, PHASE_LANES, PHASE_NAMES,
};
pub use plan::{default_yellow_s, yellow_time, PhasePlan};
pub use state::{
    approach_max, Action, ActionOutcome, CompletedCycle, LaneObservables, SimState, TickReport, Vehicle,
    VehicleStatus,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
}
