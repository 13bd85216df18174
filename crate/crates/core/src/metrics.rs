//! Per-cycle queue metric: lane maxima over the cycle, approach maxima over
//! lanes, summed over approaches.

use crate::sim::{
    approach_max, CompletedCycle, Regime, TickReport, NUM_APPROACHES, NUM_LANES, NUM_PHASES, PHASE_LANES,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle_index: u64,
    /// Max queue seen on each approach during the cycle.
    pub approach_max: [usize; NUM_APPROACHES],
    pub q_cycle: usize,
    pub length_s: u32,
    pub greens_s: [u32; NUM_PHASES],
    /// Max queue over the lanes each phase serves.
    pub phase_max: [usize; NUM_PHASES],
    pub regime: Regime,
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("empty tick log")]
pub struct EmptyLog;

/// Queue maxima of one cycle from its per-tick lane queues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleQueues {
    pub lane_max: [usize; NUM_LANES],
    pub approach_max: [usize; NUM_APPROACHES],
    pub phase_max: [usize; NUM_PHASES],
    pub q_cycle: usize,
}

pub fn cycle_queue_metric(ticks: &[[usize; NUM_LANES]]) -> Result<CycleQueues, EmptyLog> {
    if ticks.is_empty() {
        return Err(EmptyLog);
    }
    let mut lane_max = [0; NUM_LANES];
    for t in ticks {
        for l in 0..NUM_LANES {
            lane_max[l] = lane_max[l].max(t[l]);
        }
    }
    Ok(from_lane_max(lane_max))
}

fn from_lane_max(lane_max: [usize; NUM_LANES]) -> CycleQueues {
    let approach = approach_max(&lane_max);
    CycleQueues {
        lane_max,
        approach_max: approach,
        phase_max: PHASE_LANES.map(|[a, b]| lane_max[a].max(lane_max[b])),
        q_cycle: approach.iter().sum(),
    }
}

/// Folds tick reports into [`CycleRecord`]s as cycles complete.
#[derive(Debug, Clone)]
pub struct CycleTracker {
    lane_max: [usize; NUM_LANES],
    ticks: usize,
}

impl Default for CycleTracker {
    fn default() -> Self {
        Self::new()
    }
}

impl CycleTracker {
    pub fn new() -> Self {
        CycleTracker { lane_max: [0; NUM_LANES], ticks: 0 }
    }

    /// Feed one tick. `regime_at` maps a cycle's start time to its regime tag.
    pub fn push(&mut self, report: &TickReport, regime_at: impl Fn(u64) -> Regime) -> Option<CycleRecord> {
        for l in 0..NUM_LANES {
            self.lane_max[l] = self.lane_max[l].max(report.queues[l]);
        }
        self.ticks += 1;
        let done: &CompletedCycle = report.cycle_completed.as_ref()?;
        let q = from_lane_max(self.lane_max);
        self.lane_max = [0; NUM_LANES];
        self.ticks = 0;
        Some(CycleRecord {
            cycle_index: done.index,
            approach_max: q.approach_max,
            q_cycle: q.q_cycle,
            length_s: done.length_s,
            greens_s: done.greens_s,
            phase_max: q.phase_max,
            regime: regime_at(done.start_s),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tick_with(lanes: [usize; 8]) -> [usize; 8] {
        lanes
    }

    #[test]
    fn all_zero_cycle() {
        let q = cycle_queue_metric(&[[0; 8]; 30]).unwrap();
        assert_eq!(q.q_cycle, 0);
    }

    #[test]
    fn sum_of_approach_maxima() {
        // lane maxima reached on different ticks
        let ticks = [
            tick_with([3, 0, 2, 2, 9, 0, 0, 5]),
            tick_with([1, 7, 0, 0, 0, 1, 0, 0]),
        ];
        let q = cycle_queue_metric(&ticks).unwrap();
        assert_eq!(q.approach_max, [7, 2, 9, 5]);
        assert_eq!(q.q_cycle, 23);
        assert_eq!(q.phase_max, [9, 7, 2, 5]);
    }

    #[test]
    fn single_lane_peak() {
        let mut ticks = vec![[0; 8]; 10];
        ticks[4][6] = 4;
        ticks[5][6] = 2;
        assert_eq!(cycle_queue_metric(&ticks).unwrap().q_cycle, 4);
    }

    #[test]
    fn empty_log_is_an_error() {
        assert_eq!(cycle_queue_metric(&[]), Err(EmptyLog));
    }
}
