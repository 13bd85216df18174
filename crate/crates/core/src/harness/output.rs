use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::agents::write_training_log;
use crate::baselines::write_webster_csv;
use crate::metrics::CycleRecord;
use crate::sim::{write_events_csv, Approach, LaneId, Regime, NUM_LANES};

use super::episode::TickRow;
use super::experiment::SeedOutcome;
use super::stats::SummaryRow;
use super::HarnessError;

/// `cycle_index,Q_cycle,Q_N,Q_E,Q_S,Q_W,cycle_len_s,g1..g4,regime` followed
/// by the per-phase max queues `q_p1..q_p4`.
pub fn write_cycles_csv<W: Write>(records: &[CycleRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cycle_index".to_string(), "Q_cycle".to_string()];
    header.extend(Approach::ALL.iter().map(|a| format!("Q_{}", a.label())));
    header.push("cycle_len_s".into());
    header.extend((1..=4).map(|p| format!("g{p}")));
    header.push("regime".into());
    header.extend((1..=4).map(|p| format!("q_p{p}")));
    w.write_record(&header)?;
    for c in records {
        let mut row = vec![c.cycle_index.to_string(), c.q_cycle.to_string()];
        row.extend(c.approach_max.iter().map(|q| q.to_string()));
        row.push(c.length_s.to_string());
        row.extend(c.greens_s.iter().map(|g| g.to_string()));
        row.push(c.regime.label().to_string());
        row.extend(c.phase_max.iter().map(|q| q.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `config_id,n_seeds,mean_Q,std_Q` then `<regime>_p<k>` phase means.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["config_id", "n_seeds", "mean_Q", "std_Q"].map(String::from).to_vec();
    for r in Regime::ALL {
        header.extend((1..=4).map(|p| format!("{}_p{p}", r.label())));
    }
    w.write_record(&header)?;
    for s in rows {
        let mut row = vec![s.config_id.clone(), s.n_seeds.to_string(), format!("{:.4}", s.mean_q), format!("{:.4}", s.std_q)];
        for per_regime in &s.phase_means {
            row.extend(per_regime.iter().map(|m| m.map(|v| format!("{v:.4}")).unwrap_or_default()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `tick,cycle,phase,in_yellow` then one queue column per lane.
pub fn write_ticks_csv<W: Write>(ticks: &[TickRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["tick", "cycle", "phase", "in_yellow"].map(String::from).to_vec();
    header.extend((0..NUM_LANES).map(|l| format!("q_{}", LaneId::from_index(l).label())));
    w.write_record(&header)?;
    for t in ticks {
        let mut row = vec![t.clock.to_string(), t.cycle.to_string(), (t.phase + 1).to_string(), (t.in_yellow as u8).to_string()];
        row.extend(t.queues.iter().map(|q| q.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes one job's files under `<dir>/<config_id>/seed_<seed>/`.
pub fn write_seed_outcome(dir: &Path, o: &SeedOutcome) -> Result<(), HarnessError> {
    let d = dir.join(&o.config_id).join(format!("seed_{}", o.seed));
    write_cycles_csv(&o.episode.cycles, create(&d.join("cycles.csv"))?)?;
    if !o.webster_events.is_empty() {
        write_webster_csv(&o.webster_events, create(&d.join("webster.csv"))?)?;
    }
    if !o.episode.events.is_empty() {
        write_events_csv(&o.episode.events, create(&d.join("events.csv"))?)?;
    }
    if let Some(t) = &o.trained {
        if !t.log.is_empty() {
            write_training_log(&t.log, create(&d.join("train_log.csv"))?)?;
        }
        t.bundle.save(d.join("policy.tscw"))?;
        if let Some(ae) = &t.autoencoder {
            ae.to_weight_file(o.seed).save(d.join(format!("ae{}.tscw", ae.encoder.output_dim())))?;
        }
    }
    Ok(())
}

pub fn write_file<F>(path: &Path, f: F) -> Result<(), HarnessError>
where
    F: FnOnce(BufWriter<File>) -> Result<(), HarnessError>,
{
    f(create(path)?)
}
