use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tsc_lab::agents::{write_training_log, Algo, PolicyBundle};
use tsc_lab::baselines::{DynamicWebster, FixedTime};
use tsc_lab::control::Controller;
use tsc_lab::harness::{
    compare, episode_spec, pretrain_autoencoder, run_episode, run_grid, train_policy, write_file, write_seed_outcome,
    write_summary_csv, write_ticks_csv, ControllerKind, ExperimentConfig, GridConfig, HarnessError, RunRecord,
    SeedOutcome, SummaryRow,
};
use tsc_lab::rewards::RewardKind;

#[derive(Parser)]
#[command(name = "tsclab", version, about = "Adaptive signal-control experiments on a point-queue intersection")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a PPO controller and save its policy bundle.
    Train(TrainArgs),
    /// Pretrain a state autoencoder on a fixed-time state buffer.
    PretrainAe(AeArgs),
    /// Evaluate a classical controller over seeds.
    Baseline(BaselineArgs),
    /// Train the DQN baseline and save its policy bundle.
    Dqn(DqnArgs),
    /// Evaluate controllers (learned ones need --weights) over seeds.
    Eval(EvalArgs),
    /// Run a grid of experiments and write a comparison table.
    Compare(CompareArgs),
    /// Headless run emitting the per-tick signal and queue log as CSV.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (or file, for `simulate`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Demand multiplier on the built-in profile.
    #[arg(long)]
    flow_scale: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// baseline | expanded | ae4 | ae8 | ae16 | ae19 | ae32 | kplanes
    #[arg(long)]
    repr: Option<String>,
    /// queue | delay | pressure | speed | rescowait
    #[arg(long)]
    reward: Option<RewardKind>,
    #[arg(long)]
    seed: Option<u64>,
    /// Training budget in simulated seconds.
    #[arg(long)]
    timesteps: Option<u64>,
    /// Pretrained encoder for latent representations.
    #[arg(long)]
    encoder: Option<PathBuf>,
}

#[derive(Args)]
struct AeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    latent: Option<usize>,
    /// Number of states in the pretraining buffer.
    #[arg(long)]
    buffer_steps: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    common: Common,
    /// webster | fixed
    #[arg(long)]
    method: Option<ControllerKind>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Single seed; shorthand for --seeds with one value.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
}

#[derive(Args)]
struct DqnArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    timesteps: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Policy bundle to evaluate.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// fixed | webster | ppo | dqn; inferred from --weights when omitted.
    #[arg(long)]
    controller: Option<ControllerKind>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Single seed; shorthand for --seeds with one value.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    /// Grid file with one [[experiment]] table per configuration.
    #[arg(long, visible_alias = "config")]
    grid: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// fixed | webster, or a learned controller with --weights.
    #[arg(long)]
    controller: Option<ControllerKind>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
}

fn load_config(c: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(f) = c.flow_scale {
        cfg.flow_scale = f;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = Some(o.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("runs"))
}

fn single_seed(cfg: &mut ExperimentConfig, seed: Option<u64>) -> u64 {
    let s = seed.unwrap_or(cfg.seeds[0]);
    cfg.seeds = vec![s];
    s
}

fn print_summary(rows: &[SummaryRow]) {
    println!("{:<28} {:>6} {:>10} {:>8}", "config", "seeds", "mean_Q", "std_Q");
    for r in rows {
        println!("{:<28} {:>6} {:>10.2} {:>8.2}", r.config_id, r.n_seeds, r.mean_q, r.std_q);
    }
}

/// Writes per-seed files plus `summary.csv` and prints the table.
fn report(dir: &Path, outcomes: &[SeedOutcome], horizons: &[u64]) -> Result<(), HarnessError> {
    for o in outcomes {
        write_seed_outcome(dir, o)?;
    }
    let runs: Vec<RunRecord> = outcomes.iter().zip(horizons).map(|(o, &h)| o.run_record(h)).collect();
    let rows = compare(&runs)?;
    write_file(&dir.join("summary.csv"), |w| write_summary_csv(&rows, w))?;
    print_summary(&rows);
    println!("wrote {}", dir.display());
    Ok(())
}

fn train(a: TrainArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(&a.common)?;
    cfg.controller = ControllerKind::Ppo;
    if let Some(r) = a.repr {
        cfg.repr = r;
    }
    if let Some(r) = a.reward {
        cfg.reward.kind = r;
    }
    if let Some(t) = a.timesteps {
        cfg.ppo.total_timesteps = t;
    }
    if a.encoder.is_some() {
        cfg.encoder = a.encoder;
    }
    let seed = single_seed(&mut cfg, a.seed);
    cfg.validate()?;
    let t = train_policy(&cfg, seed)?;
    let dir = out_dir(&cfg).join(cfg.config_id()).join(format!("seed_{seed}"));
    t.bundle.save(dir.join("policy.tscw")).map_err(HarnessError::from)?;
    write_file(&dir.join("train_log.csv"), |w| Ok(write_training_log(&t.log, w)?))?;
    if let Some(ae) = &t.autoencoder {
        ae.to_weight_file(seed).save(dir.join(format!("ae{}.tscw", ae.encoder.output_dim())))?;
    }
    if let Some(last) = t.log.last() {
        println!(
            "trained {} seed {seed}: {} s simulated, final mean reward {:.4}, entropy {:.3}",
            cfg.config_id(),
            last.sim_time_s,
            last.mean_reward,
            last.policy_entropy
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn pretrain(a: AeArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(&a.common)?;
    if let Some(n) = a.buffer_steps {
        cfg.buffer.n_states = n;
    }
    if let Some(e) = a.epochs {
        cfg.ae.epochs = e;
    }
    let latent = a.latent.unwrap_or(cfg.ae.latent);
    let seed = single_seed(&mut cfg, a.seed);
    let ae = pretrain_autoencoder(&cfg, latent, seed)?;
    let path = out_dir(&cfg).join(format!("ae{latent}_seed{seed}.tscw"));
    ae.to_weight_file(seed).save(&path)?;
    println!("latent {latent}: reconstruction MSE {:.3e} -> {:.3e}", ae.initial_mse, ae.final_mse);
    println!("wrote {}", path.display());
    Ok(())
}

fn baseline(a: BaselineArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(&a.common)?;
    cfg.controller = a.method.unwrap_or(ControllerKind::Webster);
    if cfg.controller.is_learned() {
        return Err(HarnessError::Usage("--method must be webster or fixed".into()));
    }
    if let Some(s) = a.seeds.or(a.seed.map(|s| vec![s])) {
        cfg.seeds = s;
    }
    if let Some(h) = a.horizon {
        cfg.horizon_s = h;
    }
    let outcomes = run_grid(std::slice::from_ref(&cfg))?;
    report(&out_dir(&cfg), &outcomes, &vec![cfg.horizon_s; outcomes.len()])
}

fn dqn(a: DqnArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(&a.common)?;
    cfg.controller = ControllerKind::Dqn;
    if let Some(t) = a.timesteps {
        cfg.dqn.total_timesteps = t;
    }
    let seed = single_seed(&mut cfg, a.seed);
    cfg.validate()?;
    let t = train_policy(&cfg, seed)?;
    let dir = out_dir(&cfg).join(cfg.config_id()).join(format!("seed_{seed}"));
    t.bundle.save(dir.join("policy.tscw")).map_err(HarnessError::from)?;
    write_file(&dir.join("train_log.csv"), |w| Ok(write_training_log(&t.log, w)?))?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn learned_kind(b: &PolicyBundle) -> ControllerKind {
    match b.algo {
        Algo::Ppo => ControllerKind::Ppo,
        Algo::Dqn => ControllerKind::Dqn,
    }
}

/// Resolves the controller from flags, file and weights; a learned
/// controller without weights is a usage error.
fn resolve_controller(
    cfg: &mut ExperimentConfig,
    flag: Option<ControllerKind>,
    weights: Option<PathBuf>,
    has_file: bool,
) -> Result<(), HarnessError> {
    if weights.is_some() {
        cfg.weights = weights;
    }
    let bundle = cfg.weights.as_ref().map(PolicyBundle::load).transpose()?;
    cfg.controller = match (flag, &bundle) {
        (Some(k), _) => k,
        (None, Some(b)) => learned_kind(b),
        (None, None) if has_file => cfg.controller,
        (None, None) => ControllerKind::Fixed,
    };
    if cfg.controller.is_learned() {
        let b = bundle.ok_or_else(|| HarnessError::Usage(format!("--weights is required to evaluate {}", cfg.controller)))?;
        if learned_kind(&b) != cfg.controller {
            return Err(HarnessError::Usage(format!("weights hold a {} policy, not {}", b.algo, cfg.controller)));
        }
        if let tsc_lab::agents::ObsEncoding::Repr { repr, .. } = &b.encoding {
            cfg.repr = repr.kind().to_string();
        }
        // the bundle does not record its training reward
        if cfg.id.is_none() {
            cfg.id = Some(b.tag().replace(':', "-"));
        }
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(&a.common)?;
    resolve_controller(&mut cfg, a.controller, a.weights, a.common.config.is_some())?;
    if let Some(s) = a.seeds.or(a.seed.map(|s| vec![s])) {
        cfg.seeds = s;
    }
    if let Some(h) = a.horizon {
        cfg.horizon_s = h;
    }
    let outcomes = run_grid(std::slice::from_ref(&cfg))?;
    report(&out_dir(&cfg), &outcomes, &vec![cfg.horizon_s; outcomes.len()])
}

fn compare_grid(a: CompareArgs) -> Result<(), HarnessError> {
    let grid = GridConfig::load(&a.grid)?;
    let cfgs = grid.resolved()?;
    let outcomes = run_grid(&cfgs)?;
    let horizons: Vec<u64> = cfgs.iter().flat_map(|c| c.seeds.iter().map(move |_| c.horizon_s)).collect();
    let dir = a.out.or(grid.out_dir).unwrap_or_else(|| PathBuf::from("runs"));
    report(&dir, &outcomes, &horizons)
}

fn simulate(a: SimulateArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(&a.common)?;
    resolve_controller(&mut cfg, a.controller, a.weights, a.common.config.is_some())?;
    if let Some(h) = a.horizon {
        cfg.horizon_s = h;
    }
    let seed = single_seed(&mut cfg, a.seed);
    cfg.validate()?;
    let mut spec = episode_spec(&cfg, seed);
    spec.record_ticks = true;
    let mut ctl: Box<dyn Controller> = match cfg.controller {
        ControllerKind::Fixed => Box::new(FixedTime),
        ControllerKind::Webster => {
            Box::new(DynamicWebster::new(&cfg.webster, &cfg.layout, &cfg.plan, spec.flows.initial_rates())?)
        }
        ControllerKind::Ppo | ControllerKind::Dqn => {
            let b = PolicyBundle::load(cfg.weights.as_ref().expect("checked by resolve_controller"))?;
            Box::new(b.controller_for_horizon(spec.horizon_s, &spec.plan, cfg.eval_actions, seed)?)
        }
    };
    let result = run_episode(&spec, ctl.as_mut())?;
    match &a.common.out {
        Some(path) => {
            write_file(path, |w| write_ticks_csv(&result.ticks, w))?;
            eprintln!("{} ticks, {} cycles, mean Q_cycle {:.2}", result.ticks.len(), result.cycles.len(), result.mean_q_cycle());
        }
        None => write_ticks_csv(&result.ticks, std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.cmd {
        Cmd::Train(a) => train(a),
        Cmd::PretrainAe(a) => pretrain(a),
        Cmd::Baseline(a) => baseline(a),
        Cmd::Dqn(a) => dqn(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Compare(a) => compare_grid(a),
        Cmd::Simulate(a) => simulate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
