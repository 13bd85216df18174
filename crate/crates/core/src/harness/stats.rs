use crate::metrics::CycleRecord;
use crate::sim::{Regime, NUM_PHASES};

use super::HarnessError;

/// Pearson correlation; `None` when either series has zero variance or the
/// series are shorter than two.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "series must have equal length");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Cycles of one finished (configuration, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config_id: String,
    pub seed: u64,
    pub horizon_s: u64,
    pub cycles: Vec<CycleRecord>,
}

impl RunRecord {
    pub fn mean_q_cycle(&self) -> f64 {
        if self.cycles.is_empty() {
            return 0.0;
        }
        self.cycles.iter().map(|c| c.q_cycle as f64).sum::<f64>() / self.cycles.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config_id: String,
    pub n_seeds: usize,
    /// Mean over seeds of each run's average `Q_cycle`.
    pub mean_q: f64,
    pub std_q: f64,
    /// `[regime][phase]` mean of the per-cycle phase max queue, pooled over
    /// seeds; `None` when no cycle fell in the regime.
    pub phase_means: [[Option<f64>; NUM_PHASES]; 3],
}

/// Per-configuration mean and spread of the average queue metric across
/// seeds, plus phase-wise means per flow regime. Configurations keep their
/// first-appearance order.
pub fn compare(runs: &[RunRecord]) -> Result<Vec<SummaryRow>, HarnessError> {
    if let Some(first) = runs.first() {
        if let Some(bad) = runs.iter().find(|r| r.horizon_s != first.horizon_s) {
            return Err(HarnessError::Config(format!(
                "run '{}' seed {} has horizon {} s, expected {} s",
                bad.config_id, bad.seed, bad.horizon_s, first.horizon_s
            )));
        }
    }
    let mut ids: Vec<&str> = Vec::new();
    for r in runs {
        if !ids.contains(&r.config_id.as_str()) {
            ids.push(&r.config_id);
        }
    }
    Ok(ids
        .into_iter()
        .map(|id| {
            let group: Vec<&RunRecord> = runs.iter().filter(|r| r.config_id == id).collect();
            let avgs: Vec<f64> = group.iter().map(|r| r.mean_q_cycle()).collect();
            let (mean_q, std_q) = mean_std(&avgs);
            let phase_means = Regime::ALL.map(|regime| {
                std::array::from_fn(|p| {
                    let xs: Vec<f64> = group
                        .iter()
                        .flat_map(|r| &r.cycles)
                        .filter(|c| c.regime == regime)
                        .map(|c| c.phase_max[p] as f64)
                        .collect();
                    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
                })
            });
            SummaryRow { config_id: id.to_string(), n_seeds: group.len(), mean_q, std_q, phase_means }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub n_cycles: usize,
    /// Per phase: Pearson r between the phase's max queue and its green.
    pub phase_r: [Option<f64>; NUM_PHASES],
    /// Pearson r between cycle length and `Q_cycle`.
    pub cycle_length_r: Option<f64>,
}

pub const MIN_CORRELATION_CYCLES: usize = 10;

pub fn correlation_report(records: &[CycleRecord]) -> Result<CorrelationReport, HarnessError> {
    if records.len() < MIN_CORRELATION_CYCLES {
        return Err(HarnessError::Config(format!(
            "correlation needs at least {MIN_CORRELATION_CYCLES} cycles, got {}",
            records.len()
        )));
    }
    let phase_r = std::array::from_fn(|p| {
        let q: Vec<f64> = records.iter().map(|c| c.phase_max[p] as f64).collect();
        let g: Vec<f64> = records.iter().map(|c| c.greens_s[p] as f64).collect();
        pearson(&q, &g)
    });
    let len: Vec<f64> = records.iter().map(|c| c.length_s as f64).collect();
    let q: Vec<f64> = records.iter().map(|c| c.q_cycle as f64).collect();
    Ok(CorrelationReport { n_cycles: records.len(), phase_r, cycle_length_r: pearson(&len, &q) })
}
