//! The interface every signal controller presents to the episode runner.

use crate::sim::{SimState, TickReport};

pub trait Controller {
    /// Short id used in output tables.
    fn name(&self) -> String;

    /// Called once before the first tick of an episode.
    fn reset(&mut self, _sim: &SimState) {}

    /// Called after every tick. Planners that re-time the signal do it here.
    fn on_tick(&mut self, _sim: &mut SimState, _report: &TickReport) {}

    /// Action index in `{0, 1, 2}` for the current decision point.
    fn decide(&mut self, sim: &SimState) -> usize;
}
