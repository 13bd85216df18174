use serde::{Deserialize, Serialize};

use super::SimError;

pub const NUM_APPROACHES: usize = 4;
pub const LANES_PER_APPROACH: usize = 2;
pub const NUM_LANES: usize = NUM_APPROACHES * LANES_PER_APPROACH;
pub const NUM_PHASES: usize = 4;

/// Cardinal approach entering the junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Approach {
    North,
    East,
    South,
    West,
}

impl Approach {
    pub const ALL: [Approach; NUM_APPROACHES] =
        [Approach::North, Approach::East, Approach::South, Approach::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Approach::North => "N",
            Approach::East => "E",
            Approach::South => "S",
            Approach::West => "W",
        }
    }
}

/// Lane 0 of an approach carries through and left movements, lane 1 the right turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LaneId {
    pub approach: Approach,
    pub slot: usize,
}

impl LaneId {
    pub fn new(approach: Approach, slot: usize) -> Self {
        debug_assert!(slot < LANES_PER_APPROACH);
        LaneId { approach, slot }
    }

    /// Flat index `approach * 2 + slot`, the order used by every per-lane array.
    pub fn index(self) -> usize {
        self.approach.index() * LANES_PER_APPROACH + self.slot
    }

    pub fn from_index(index: usize) -> Self {
        LaneId {
            approach: Approach::ALL[index / LANES_PER_APPROACH],
            slot: index % LANES_PER_APPROACH,
        }
    }

    pub fn label(self) -> String {
        format!("{}{}", self.approach.label(), self.slot)
    }
}

/// Lanes that receive green during each phase, in phase order
/// NS through+left, NS right, EW through+left, EW right.
pub const PHASE_LANES: [[usize; 2]; NUM_PHASES] = [[0, 4], [1, 5], [2, 6], [3, 7]];

pub const PHASE_NAMES: [&str; NUM_PHASES] = ["NS-through-left", "NS-right", "EW-through-left", "EW-right"];

/// Phase that serves `lane`.
pub fn phase_of_lane(lane: usize) -> usize {
    PHASE_LANES
        .iter()
        .position(|lanes| lanes.contains(&lane))
        .expect("every lane belongs to exactly one phase")
}

/// Geometry and traffic constants of the single four-approach junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntersectionLayout {
    pub lane_storage_capacity: usize,
    pub travel_time_to_stopline_s: u32,
    pub saturation_headway_s: f64,
    pub startup_lost_time_s: u32,
    pub free_flow_speed_mps: f64,
}

impl Default for IntersectionLayout {
    fn default() -> Self {
        IntersectionLayout {
            lane_storage_capacity: 25,
            travel_time_to_stopline_s: 15,
            saturation_headway_s: 2.0,
            startup_lost_time_s: 2,
            free_flow_speed_mps: 11.11,
        }
    }
}

impl IntersectionLayout {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.lane_storage_capacity < 1 {
            return Err(SimError::Config("lane_storage_capacity must be at least 1".into()));
        }
        if !(self.saturation_headway_s.is_finite() && self.saturation_headway_s > 0.0) {
            return Err(SimError::Config("saturation_headway_s must be positive".into()));
        }
        if self.headway_ms() == 0 {
            return Err(SimError::Config("saturation_headway_s rounds to zero milliseconds".into()));
        }
        if !(self.free_flow_speed_mps.is_finite() && self.free_flow_speed_mps > 0.0) {
            return Err(SimError::Config("free_flow_speed_mps must be positive".into()));
        }
        Ok(())
    }

    /// Headway in whole milliseconds; discharge bookkeeping is integer.
    pub fn headway_ms(&self) -> u32 {
        (self.saturation_headway_s * 1000.0).round() as u32
    }

    /// Saturation flow in vehicles per hour per lane.
    pub fn saturation_flow_vph(&self) -> f64 {
        3600.0 / self.saturation_headway_s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lane_indices_round_trip() {
        for i in 0..NUM_LANES {
            assert_eq!(LaneId::from_index(i).index(), i);
        }
        assert_eq!(LaneId::new(Approach::South, 1).index(), 5);
    }

    #[test]
    fn every_lane_served_once() {
        let mut seen = [0; NUM_LANES];
        for lanes in PHASE_LANES {
            for l in lanes {
                seen[l] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert_eq!(phase_of_lane(6), 2);
    }

    #[test]
    fn zero_capacity_rejected() {
        let layout = IntersectionLayout { lane_storage_capacity: 0, ..Default::default() };
        assert!(matches!(layout.validate(), Err(SimError::Config(_))));
    }

    #[test]
    fn nonpositive_headway_rejected() {
        let layout = IntersectionLayout { saturation_headway_s: 0.0, ..Default::default() };
        assert!(layout.validate().is_err());
    }
}
