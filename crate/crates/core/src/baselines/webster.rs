use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::control::Controller;
use crate::sim::{IntersectionLayout, PhasePlan, SimState, TickReport, NUM_LANES, NUM_PHASES, PHASE_LANES};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WebsterError {
    #[error("lost time must be positive, got {0}")]
    LostTime(f64),
    #[error("flow ratio of phase {0} is negative or not finite")]
    FlowRatio(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WebsterInput {
    /// Total lost time per cycle, seconds.
    pub lost_time_s: f64,
    /// Critical flow ratio of each phase.
    pub y: [f64; NUM_PHASES],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WebsterTimings {
    /// Cycle before clamping; infinite when saturated.
    pub raw_cycle_s: f64,
    pub cycle_s: f64,
    pub greens_s: [f64; NUM_PHASES],
    pub saturated: bool,
}

/// Delay-minimizing cycle `(1.5 L + 5) / (1 - sum Y)` with the effective
/// green split in proportion to the flow ratios.
///
/// The cycle is capped at the longest the plan allows (`4 g_max + 4 Z`).
/// Short cycles are not raised to a floor; the per-phase `g_min` clamp on
/// the greens already guarantees a legal plan.
pub fn webster_timings(
    input: &WebsterInput,
    g_min: f64,
    g_max: f64,
    yellow: f64,
) -> Result<WebsterTimings, WebsterError> {
    if !(input.lost_time_s > 0.0 && input.lost_time_s.is_finite()) {
        return Err(WebsterError::LostTime(input.lost_time_s));
    }
    if let Some(i) = input.y.iter().position(|y| !(y.is_finite() && *y >= 0.0)) {
        return Err(WebsterError::FlowRatio(i));
    }
    let n = NUM_PHASES as f64;
    let c_max = n * g_max + n * yellow;
    let sum_y: f64 = input.y.iter().sum();
    if sum_y >= 1.0 {
        return Ok(WebsterTimings {
            raw_cycle_s: f64::INFINITY,
            cycle_s: c_max,
            greens_s: [g_max; NUM_PHASES],
            saturated: true,
        });
    }
    let raw = (1.5 * input.lost_time_s + 5.0) / (1.0 - sum_y);
    let cycle = raw.min(c_max);
    let effective = cycle - input.lost_time_s;
    let greens = input.y.map(|y| {
        let g = if sum_y > 0.0 { y / sum_y * effective } else { 0.0 };
        g.clamp(g_min, g_max)
    });
    Ok(WebsterTimings { raw_cycle_s: raw, cycle_s: cycle, greens_s: greens, saturated: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WebsterConfig {
    pub recompute_interval_s: u64,
    pub flow_window_s: u64,
    /// Defaults to four times (startup lost time + yellow - 2).
    pub lost_time_s: Option<f64>,
    /// Per-lane saturation flow; defaults to 3600 / saturation headway.
    pub saturation_flow_vph: Option<f64>,
}

impl Default for WebsterConfig {
    fn default() -> Self {
        WebsterConfig { recompute_interval_s: 145, flow_window_s: 900, lost_time_s: None, saturation_flow_vph: None }
    }
}

/// One re-timing, as written to the recompute log.
#[derive(Debug, Clone, PartialEq)]
pub struct WebsterEvent {
    pub clock: u64,
    pub y: [f64; NUM_PHASES],
    pub cycle_s: f64,
    pub greens_s: [f64; NUM_PHASES],
    pub saturated: bool,
}

/// Webster plan recomputed on a fixed interval from a moving average of
/// measured arrivals. New greens take effect from the next phase start.
#[derive(Debug, Clone)]
pub struct DynamicWebster {
    interval_s: u64,
    window: usize,
    lost_time_s: f64,
    saturation_vph: f64,
    default_flows_vph: [f64; NUM_LANES],
    g_min: f64,
    g_max: f64,
    yellow: f64,
    history: VecDeque<[u32; NUM_LANES]>,
    events: Vec<WebsterEvent>,
}

impl DynamicWebster {
    /// `default_flows_vph` is what the planner assumes while it has no counts.
    pub fn new(
        cfg: &WebsterConfig,
        layout: &IntersectionLayout,
        plan: &PhasePlan,
        default_flows_vph: [f64; NUM_LANES],
    ) -> Result<Self, WebsterError> {
        let lost =
            cfg.lost_time_s.unwrap_or(4.0 * (layout.startup_lost_time_s as f64 + plan.yellow_s as f64 - 2.0));
        if !(lost > 0.0) {
            return Err(WebsterError::LostTime(lost));
        }
        Ok(DynamicWebster {
            interval_s: cfg.recompute_interval_s.max(1),
            window: cfg.flow_window_s.max(1) as usize,
            lost_time_s: lost,
            saturation_vph: cfg.saturation_flow_vph.unwrap_or_else(|| layout.saturation_flow_vph()),
            default_flows_vph,
            g_min: plan.g_min_s as f64,
            g_max: plan.g_max_s as f64,
            yellow: plan.yellow_s as f64,
            history: VecDeque::new(),
            events: Vec::new(),
        })
    }

    pub fn lost_time_s(&self) -> f64 {
        self.lost_time_s
    }

    pub fn events(&self) -> &[WebsterEvent] {
        &self.events
    }

    /// Moving-average arrival rate per lane in veh/h.
    pub fn estimated_flows_vph(&self) -> [f64; NUM_LANES] {
        if self.history.is_empty() {
            return self.default_flows_vph;
        }
        let mut sums = [0u64; NUM_LANES];
        for tick in &self.history {
            for l in 0..NUM_LANES {
                sums[l] += tick[l] as u64;
            }
        }
        let secs = self.history.len() as f64;
        sums.map(|s| s as f64 * 3600.0 / secs)
    }

    fn recompute(&mut self, sim: &mut SimState) {
        let q = self.estimated_flows_vph();
        let y = PHASE_LANES.map(|lanes| lanes.iter().map(|&l| q[l] / self.saturation_vph).fold(0.0, f64::max));
        let input = WebsterInput { lost_time_s: self.lost_time_s, y };
        let t = webster_timings(&input, self.g_min, self.g_max, self.yellow)
            .expect("lost time and measured ratios are valid");
        sim.install_greens(t.greens_s.map(|g| g.round() as u32));
        self.events.push(WebsterEvent {
            clock: sim.clock(),
            y,
            cycle_s: t.cycle_s,
            greens_s: t.greens_s,
            saturated: t.saturated,
        });
    }
}

impl Controller for DynamicWebster {
    fn name(&self) -> String {
        "webster".into()
    }

    fn reset(&mut self, _sim: &SimState) {
        self.history.clear();
        self.events.clear();
    }

    fn on_tick(&mut self, sim: &mut SimState, report: &TickReport) {
        self.history.push_back(report.arrivals);
        if self.history.len() > self.window {
            self.history.pop_front();
        }
        if report.clock.is_multiple_of(self.interval_s) {
            self.recompute(sim);
        }
    }

    fn decide(&mut self, _sim: &SimState) -> usize {
        1
    }
}

/// Recompute log: `clock,Y1..Y4,C_o,g1..g4,saturated`.
pub fn write_webster_csv<W: Write>(events: &[WebsterEvent], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["clock", "Y1", "Y2", "Y3", "Y4", "C_o", "g1", "g2", "g3", "g4", "saturated"])?;
    for e in events {
        let mut row = vec![e.clock.to_string()];
        row.extend(e.y.iter().map(|v| format!("{v:.6}")));
        row.push(format!("{:.3}", e.cycle_s));
        row.extend(e.greens_s.iter().map(|v| format!("{v:.3}")));
        row.push((e.saturated as u8).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
