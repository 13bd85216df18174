//! Classical controllers: fixed-time and Webster re-timing from measured flows.

mod webster;

pub use webster::{
    webster_timings, write_webster_csv, DynamicWebster, WebsterConfig, WebsterError, WebsterEvent, WebsterInput,
    WebsterTimings,
};

use crate::control::Controller;
use crate::sim::SimState;

/// Runs the programmed greens unchanged.
#[derive(Debug, Clone, Default)]
pub struct FixedTime;

impl Controller for FixedTime {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn decide(&mut self, _sim: &SimState) -> usize {
        1
    }
}
