use serde::{Deserialize, Serialize};

use super::layout::NUM_LANES;
use super::SimError;

/// Demand regime label attached to a flow segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    High,
    Medium,
    Low,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::High, Regime::Medium, Regime::Low];

    pub fn label(self) -> &'static str {
        match self {
            Regime::High => "high",
            Regime::Medium => "medium",
            Regime::Low => "low",
        }
    }
}

/// Arrival rates (veh/h) for all eight lane movements over `[start_s, end_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSegment {
    pub start_s: u64,
    pub end_s: u64,
    pub regime: Regime,
    /// Lane order N0 N1 E0 E1 S0 S1 W0 W1.
    pub rates_vph: [f64; NUM_LANES],
}

/// Piecewise-constant arrival-rate schedule.
///
/// With `repeat` set, the schedule is periodic with period equal to the end of
/// the last segment, so a one-hour profile can drive a training run of any
/// length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowProfile {
    pub segments: Vec<FlowSegment>,
    #[serde(default)]
    pub repeat: bool,
}

/// Rates of the high-demand regime; north-south through+left is the critical movement.
pub const HIGH_DEMAND_VPH: [f64; NUM_LANES] = [378.0, 119.0, 266.0, 84.0, 336.0, 105.0, 238.0, 98.0];

impl FlowProfile {
    /// No demand on any lane, forever.
    pub fn zero() -> Self {
        FlowProfile {
            segments: vec![FlowSegment {
                start_s: 0,
                end_s: u64::MAX,
                regime: Regime::Low,
                rates_vph: [0.0; NUM_LANES],
            }],
            repeat: false,
        }
    }

    /// The same rates on every lane for the whole run.
    pub fn constant(rates_vph: [f64; NUM_LANES], regime: Regime) -> Self {
        FlowProfile {
            segments: vec![FlowSegment { start_s: 0, end_s: u64::MAX, regime, rates_vph }],
            repeat: false,
        }
    }

    /// Hour-long high / medium / low schedule (20 minutes each), repeated.
    pub fn synthetic() -> Self {
        Self::synthetic_scaled(1.0)
    }

    /// [`FlowProfile::synthetic`] with every rate multiplied by `scale`.
    pub fn synthetic_scaled(scale: f64) -> Self {
        let scaled = |f: f64| HIGH_DEMAND_VPH.map(|r| r * f * scale);
        FlowProfile {
            segments: vec![
                FlowSegment { start_s: 0, end_s: 1200, regime: Regime::High, rates_vph: scaled(1.0) },
                FlowSegment { start_s: 1200, end_s: 2400, regime: Regime::Medium, rates_vph: scaled(0.7) },
                FlowSegment { start_s: 2400, end_s: 3600, regime: Regime::Low, rates_vph: scaled(0.4) },
            ],
            repeat: true,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.segments.is_empty() {
            return Err(SimError::Config("flow profile has no segments".into()));
        }
        let mut expected_start = 0;
        for seg in &self.segments {
            if seg.start_s != expected_start {
                return Err(SimError::Config(format!(
                    "flow segment starts at {} s, expected {} s (gap or overlap)",
                    seg.start_s, expected_start
                )));
            }
            if seg.end_s <= seg.start_s {
                return Err(SimError::Config(format!("empty flow segment at {} s", seg.start_s)));
            }
            if seg.rates_vph.iter().any(|r| !r.is_finite() || *r < 0.0) {
                return Err(SimError::Config(format!("negative or non-finite rate in segment at {} s", seg.start_s)));
            }
            expected_start = seg.end_s;
        }
        Ok(())
    }

    /// Checks that the schedule covers `[0, horizon_s)`.
    pub fn validate_horizon(&self, horizon_s: u64) -> Result<(), SimError> {
        self.validate()?;
        if !self.repeat && self.end_s() < horizon_s {
            return Err(SimError::Config(format!(
                "flow profile ends at {} s, before the {} s horizon",
                self.end_s(),
                horizon_s
            )));
        }
        Ok(())
    }

    fn end_s(&self) -> u64 {
        self.segments.last().map_or(0, |s| s.end_s)
    }

    pub fn segment_at(&self, t: u64) -> Option<&FlowSegment> {
        let t = if self.repeat && self.end_s() > 0 { t % self.end_s() } else { t };
        // segments are few; linear scan keeps the order explicit
        self.segments.iter().find(|s| s.start_s <= t && t < s.end_s)
    }

    pub fn rate_vph(&self, lane: usize, t: u64) -> f64 {
        self.segment_at(t).map_or(0.0, |s| s.rates_vph[lane])
    }

    pub fn regime_at(&self, t: u64) -> Regime {
        self.segment_at(t).map_or(Regime::Low, |s| s.regime)
    }

    /// Rates of the first segment; what a planner assumes before it has data.
    pub fn initial_rates(&self) -> [f64; NUM_LANES] {
        self.segments.first().map_or([0.0; NUM_LANES], |s| s.rates_vph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_profile_is_valid_and_periodic() {
        let p = FlowProfile::synthetic();
        p.validate_horizon(100_000).unwrap();
        assert_eq!(p.regime_at(0), Regime::High);
        assert_eq!(p.regime_at(1300), Regime::Medium);
        assert_eq!(p.regime_at(3599), Regime::Low);
        assert_eq!(p.regime_at(3600), Regime::High);
        assert_eq!(p.rate_vph(0, 7200 + 10), HIGH_DEMAND_VPH[0]);
    }

    #[test]
    fn critical_movement_is_ns_through_left() {
        let max = HIGH_DEMAND_VPH.iter().cloned().fold(0.0, f64::max);
        assert_eq!(HIGH_DEMAND_VPH[0], max);
    }

    #[test]
    fn gaps_and_negative_rates_rejected() {
        let mut p = FlowProfile::synthetic();
        p.segments[1].start_s = 1300;
        assert!(p.validate().is_err());

        let mut p = FlowProfile::synthetic();
        p.segments[0].rates_vph[3] = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn finite_profile_must_cover_horizon() {
        let p = FlowProfile {
            segments: vec![FlowSegment { start_s: 0, end_s: 100, regime: Regime::Low, rates_vph: [0.0; 8] }],
            repeat: false,
        };
        assert!(p.validate_horizon(100).is_ok());
        assert!(p.validate_horizon(101).is_err());
        assert_eq!(p.rate_vph(0, 150), 0.0);
    }
}
