use std::io::Write;

/// One row per rollout (PPO) or per logging window (DQN).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLogRow {
    pub rollout_idx: usize,
    pub sim_time_s: u64,
    pub mean_reward: f64,
    /// `None` when no cycle finished inside the window.
    pub mean_q_cycle: Option<f64>,
    pub policy_entropy: f64,
    pub value_loss: f64,
}

pub fn write_training_log<W: Write>(rows: &[TrainLogRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rollout_idx", "sim_time_s", "mean_reward", "mean_Q_cycle", "policy_entropy", "value_loss"])?;
    for r in rows {
        w.write_record([
            r.rollout_idx.to_string(),
            r.sim_time_s.to_string(),
            r.mean_reward.to_string(),
            r.mean_q_cycle.map(|q| q.to_string()).unwrap_or_default(),
            r.policy_entropy.to_string(),
            r.value_loss.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
