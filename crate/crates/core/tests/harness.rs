use approx::assert_abs_diff_eq;
use tsc_lab::harness::{
    compare, correlation_report, mean_std, pearson, run_grid, ControllerKind, ExperimentConfig, GridConfig, RunRecord,
};
use tsc_lab::metrics::CycleRecord;
use tsc_lab::sim::Regime;

fn cycle(i: u64, q: usize, phase_max: [usize; 4], greens_s: [u32; 4]) -> CycleRecord {
    CycleRecord {
        cycle_index: i,
        approach_max: [q, 0, 0, 0],
        q_cycle: q,
        length_s: greens_s.iter().sum::<u32>() + 20,
        greens_s,
        phase_max,
        regime: Regime::High,
    }
}

fn run(id: &str, seed: u64, horizon_s: u64, qs: &[usize]) -> RunRecord {
    let cycles = qs.iter().enumerate().map(|(i, &q)| cycle(i as u64, q, [q, 0, 0, 0], [20; 4])).collect();
    RunRecord { config_id: id.into(), seed, horizon_s, cycles }
}

#[test]
fn compare_reports_mean_and_sample_std() {
    let rows = compare(&[run("a", 0, 7200, &[40, 60]), run("a", 1, 7200, &[60, 60]), run("b", 0, 7200, &[3])]).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].config_id, "a");
    assert_abs_diff_eq!(rows[0].mean_q, 55.0, epsilon = 1e-12);
    assert_abs_diff_eq!(rows[0].std_q, 7.0711, epsilon = 1e-4);
    assert_eq!(rows[1].n_seeds, 1);
    assert_eq!(rows[1].std_q, 0.0);
    assert_eq!(rows[0].phase_means[0][0], Some(55.0));
    assert_eq!(rows[0].phase_means[2][0], None);
}

#[test]
fn compare_rejects_mixed_horizons() {
    assert!(compare(&[run("a", 0, 7200, &[1]), run("a", 1, 3600, &[1])]).is_err());
}

#[test]
fn correlation_examples() {
    let constant: Vec<_> = (0..12).map(|i| cycle(i, i as usize, [i as usize; 4], [20; 4])).collect();
    let r = correlation_report(&constant).unwrap();
    assert!(r.phase_r.iter().all(Option::is_none));

    let tracking: Vec<_> = (0..12).map(|i| cycle(i, 5, [i as usize + 3; 4], [10 + i as u32; 4])).collect();
    let r = correlation_report(&tracking).unwrap();
    assert_abs_diff_eq!(r.phase_r[0].unwrap(), 1.0, epsilon = 1e-12);

    assert!(correlation_report(&tracking[..9]).is_err());
    assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
    assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
}

#[test]
fn grid_toml_applies_overrides() {
    let grid = GridConfig::from_toml(
        r#"
        seeds = [3, 4]
        horizon_s = 3600

        [[experiment]]
        controller = "webster"

        [[experiment]]
        controller = "ppo"
        repr = "ae8"
        seeds = [9]
        ppo = { total_timesteps = 5000 }
        "#,
    )
    .unwrap();
    let cfgs = grid.resolved().unwrap();
    assert_eq!(cfgs[0].controller, ControllerKind::Webster);
    assert!(cfgs.iter().all(|c| c.seeds == [3, 4] && c.horizon_s == 3600));
    assert_eq!(cfgs[1].ppo.total_timesteps, 5000);
    assert_eq!(cfgs[1].config_id(), "ppo-ae8-queue");

    assert!(ExperimentConfig::from_toml("controler = \"fixed\"").is_err());
    let bad_latent = "[[experiment]]\ncontroller = \"ppo\"\nrepr = \"ae5\"";
    assert!(GridConfig::from_toml(bad_latent).unwrap().resolved().is_err());
    assert!(GridConfig::from_toml("[[experiment]]\nrepr = \"pixels\"").unwrap().resolved().is_err());
    assert!(GridConfig::default().resolved().is_err());
}

#[test]
fn no_demand_means_no_queues() {
    let cfgs: Vec<_> = [ControllerKind::Fixed, ControllerKind::Webster]
        .map(|controller| ExperimentConfig { controller, flow_scale: 0.0, seeds: vec![0, 1], horizon_s: 1800, ..Default::default() })
        .to_vec();
    let out = run_grid(&cfgs).unwrap();
    assert_eq!(out.len(), 4);
    assert!(out.iter().all(|o| o.episode.mean_q_cycle() == 0.0));
}

#[test]
fn baselines_are_reproducible_and_ordered() {
    let cfg = |controller| ExperimentConfig { controller, seeds: vec![0, 1], horizon_s: 3600, ..Default::default() };
    let cfgs = [cfg(ControllerKind::Webster), cfg(ControllerKind::Fixed)];
    let a = run_grid(&cfgs).unwrap();
    let b = run_grid(&cfgs).unwrap();
    let recs: Vec<_> = a.iter().map(|o| o.run_record(3600)).collect();
    assert_eq!(recs, b.iter().map(|o| o.run_record(3600)).collect::<Vec<_>>());
    let rows = compare(&recs).unwrap();
    assert!(rows[0].mean_q < rows[1].mean_q, "webster {} vs fixed {}", rows[0].mean_q, rows[1].mean_q);
}
