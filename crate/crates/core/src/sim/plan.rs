use serde::{Deserialize, Serialize};

use super::layout::NUM_PHASES;
use super::SimError;

/// Minimum yellow interval from the dilemma-zone model:
/// reaction time plus clearing time plus stopping time.
///
/// `reaction_s` is the driver reaction time, `width_m` the junction width,
/// `vehicle_len_m` the effective vehicle length, `speed_mps` the approach
/// speed and `decel_mps2` the comfortable deceleration.
pub fn yellow_time(
    reaction_s: f64,
    width_m: f64,
    vehicle_len_m: f64,
    speed_mps: f64,
    decel_mps2: f64,
) -> Result<f64, SimError> {
    if !(speed_mps > 0.0) || !speed_mps.is_finite() {
        return Err(SimError::Domain(format!("approach speed must be positive, got {speed_mps}")));
    }
    if !(decel_mps2 > 0.0) || !decel_mps2.is_finite() {
        return Err(SimError::Domain(format!("deceleration must be positive, got {decel_mps2}")));
    }
    Ok(reaction_s + (width_m + vehicle_len_m) / speed_mps + speed_mps / (2.0 * decel_mps2))
}

/// Dilemma-zone inputs used to size the default yellow.
pub const DEFAULT_REACTION_S: f64 = 1.0;
pub const DEFAULT_WIDTH_M: f64 = 12.4;
pub const DEFAULT_VEHICLE_LEN_M: f64 = 10.2;
pub const DEFAULT_APPROACH_SPEED_MPS: f64 = 11.11;
pub const DEFAULT_DECEL_MPS2: f64 = 3.53;

/// Yellow interval the plan stores: the dilemma-zone minimum rounded up.
pub fn default_yellow_s() -> u32 {
    yellow_time(
        DEFAULT_REACTION_S,
        DEFAULT_WIDTH_M,
        DEFAULT_VEHICLE_LEN_M,
        DEFAULT_APPROACH_SPEED_MPS,
        DEFAULT_DECEL_MPS2,
    )
    .expect("default dilemma-zone parameters are valid")
    .ceil() as u32
}

/// Signal plan for the four-phase sequence. Greens are whole seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhasePlan {
    /// Programmed green installed at the start of every cycle.
    pub default_green_s: [u32; NUM_PHASES],
    pub yellow_s: u32,
    pub g_min_s: u32,
    pub g_max_s: u32,
    pub delta_time_s: u32,
}

impl Default for PhasePlan {
    fn default() -> Self {
        PhasePlan {
            default_green_s: [20; NUM_PHASES],
            yellow_s: default_yellow_s(),
            g_min_s: 10,
            g_max_s: 40,
            delta_time_s: 5,
        }
    }
}

impl PhasePlan {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.g_min_s > self.g_max_s {
            return Err(SimError::Config(format!(
                "g_min ({}) exceeds g_max ({})",
                self.g_min_s, self.g_max_s
            )));
        }
        if self.g_min_s == 0 {
            return Err(SimError::Config("g_min must be positive".into()));
        }
        if self.yellow_s == 0 {
            return Err(SimError::Config("yellow must be positive".into()));
        }
        if self.delta_time_s == 0 {
            return Err(SimError::Config("delta_time must be positive".into()));
        }
        for (i, &g) in self.default_green_s.iter().enumerate() {
            if g < self.g_min_s || g > self.g_max_s {
                return Err(SimError::Config(format!(
                    "default green {g} s of phase {} outside [{}, {}]",
                    i + 1,
                    self.g_min_s,
                    self.g_max_s
                )));
            }
        }
        Ok(())
    }

    /// Cycle length of the default plan, greens plus yellows.
    pub fn default_cycle_s(&self) -> u32 {
        self.default_green_s.iter().sum::<u32>() + NUM_PHASES as u32 * self.yellow_s
    }

    /// Longest admissible cycle, every phase at `g_max`.
    pub fn max_cycle_s(&self) -> u32 {
        NUM_PHASES as u32 * (self.g_max_s + self.yellow_s)
    }

    pub fn min_cycle_s(&self) -> u32 {
        NUM_PHASES as u32 * (self.g_min_s + self.yellow_s)
    }

    pub fn clamp_green(&self, g: u32) -> u32 {
        g.clamp(self.g_min_s, self.g_max_s)
    }
}
