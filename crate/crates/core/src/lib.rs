//! Reinforcement-learning traffic-signal control on a point-queue
//! intersection simulator.

pub mod agents;
pub mod baselines;
pub mod control;
pub mod metrics;
pub mod harness;
pub mod nn;
pub mod par;
pub mod repr;
pub mod rewards;
pub mod sim;
pub mod weights;
