use crate::sim::{PhasePlan, SimState, NUM_APPROACHES, NUM_PHASES};

pub const EXPANDED_DIM: usize = 19;
pub const BASELINE_DIM: usize = 8;

/// Raw baseline observation: programmed cycle length, programmed greens,
/// 1-based phase index, time remaining in the phase, and total queue
/// (sum of per-approach maxima).
pub fn baseline_state(sim: &SimState) -> [f64; BASELINE_DIM] {
    let g = sim.programmed_green();
    let q: usize = sim.approach_queues().iter().sum();
    [
        sim.programmed_cycle_s() as f64,
        g[0] as f64,
        g[1] as f64,
        g[2] as f64,
        g[3] as f64,
        (sim.current_phase() + 1) as f64,
        sim.time_remaining_s() as f64,
        q as f64,
    ]
}

/// Scales used to bring the expanded observation into unit ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub queue_max: f64,
    pub green_max: f64,
    /// Longest possible cycle, `g_max * N_p + N_p * Z`.
    pub cycle_max: f64,
    /// Expected number of cycles in a training horizon.
    pub cycles_max: f64,
}

impl Default for Normalizer {
    fn default() -> Self {
        // 100 000 s of training over a nominal 100 s cycle
        Normalizer { queue_max: 25.0, green_max: 40.0, cycle_max: 180.0, cycles_max: 1000.0 }
    }
}

impl Normalizer {
    /// Cycle-count scale for a run of `horizon_s` seconds: the number of
    /// default-plan cycles that fit in it, so the feature reads as the
    /// fraction of the run elapsed whatever the run length.
    pub fn for_horizon(horizon_s: u64, plan: &PhasePlan) -> Self {
        let cycles = (horizon_s as f64 / plan.default_cycle_s() as f64).max(1.0);
        Normalizer { cycles_max: cycles, cycle_max: plan.max_cycle_s() as f64, green_max: plan.g_max_s as f64, ..Default::default() }
    }
}

/// 19-dimensional normalized state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpandedState19 {
    pub cycle_time: f64,
    pub phase: [f64; NUM_PHASES],
    pub phase_time: f64,
    pub cycles: f64,
    pub queues: [f64; NUM_APPROACHES],
    pub queue_deltas: [f64; NUM_APPROACHES],
    pub greens: [f64; NUM_PHASES],
}

impl ExpandedState19 {
    /// Flat order: cycle time, phase one-hot, phase time, cycle count,
    /// queues, queue changes, greens.
    pub fn to_array(&self) -> [f64; EXPANDED_DIM] {
        let mut out = [0.0; EXPANDED_DIM];
        out[0] = self.cycle_time;
        out[1..5].copy_from_slice(&self.phase);
        out[5] = self.phase_time;
        out[6] = self.cycles;
        out[7..11].copy_from_slice(&self.queues);
        out[11..15].copy_from_slice(&self.queue_deltas);
        out[15..19].copy_from_slice(&self.greens);
        out
    }

    pub fn from_array(v: &[f64; EXPANDED_DIM]) -> Self {
        let four = |i: usize| [v[i], v[i + 1], v[i + 2], v[i + 3]];
        ExpandedState19 {
            cycle_time: v[0],
            phase: four(1),
            phase_time: v[5],
            cycles: v[6],
            queues: four(7),
            queue_deltas: four(11),
            greens: four(15),
        }
    }
}

pub fn expanded_state(sim: &SimState, prev_queues: &[usize; NUM_APPROACHES], norm: &Normalizer) -> ExpandedState19 {
    let q = sim.approach_queues();
    let mut phase = [0.0; NUM_PHASES];
    phase[sim.current_phase()] = 1.0;
    let g = sim.programmed_green();
    ExpandedState19 {
        cycle_time: (sim.cycle_elapsed() as f64 / norm.cycle_max).clamp(0.0, 1.0),
        phase,
        phase_time: (sim.phase_elapsed() as f64 / norm.green_max).clamp(0.0, 1.0),
        cycles: (sim.cycles_completed() as f64 / norm.cycles_max).clamp(0.0, 1.0),
        queues: q.map(|x| (x as f64 / norm.queue_max).clamp(0.0, 1.0)),
        queue_deltas: std::array::from_fn(|j| {
            ((q[j] as f64 - prev_queues[j] as f64) / norm.queue_max).clamp(-1.0, 1.0)
        }),
        greens: g.map(|x| (x as f64 / norm.green_max).clamp(0.0, 1.0)),
    }
}
