//! relibench command-line interface: validate configs and task
//! suites, run the main grid or the fault ablation, emit reports, and
//! replay logs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relibench::agents::run_oracle;
use relibench::chaos::{build_profile, FaultSession};
use relibench::core::config::RunConfig;
use relibench::core::log::read_episode_log;
use relibench::core::types::EpisodeRecord;
use relibench::domains::{all_task_suites, validate_task, verify};
use relibench::metrics::{
    ablation_csv, ablation_markdown, ablation_report, aggregate_cost, build_surface,
    cost_markdown, critical_threshold, degradation_gradient, recovery_markdown, recovery_stats,
    surface_csv, surface_markdown, surface_plot_data, surface_volume, Axis, Observation,
};
use relibench::runner::{execute_plan, plan_experiment, replay_log};

/// Built-in configuration used when --config is not given.
const DEFAULT_CONFIG: &str = include_str!("../../assets/default_config.toml");

#[derive(Parser)]
#[command(
    name = "relibench",
    about = "Reliability evaluation harness for tool-calling agents",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to a TOML run configuration (defaults to the built-in).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the agent list (repeatable).
    #[arg(long)]
    agent: Vec<String>,
    /// Override the model id.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory for the episode log and reports.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for episode execution (default: all cores).
    #[arg(long)]
    parallel: Option<usize>,
    /// Use the built-in deterministic stub model (no network). This is
    /// the default; pass it explicitly for clarity in scripts.
    #[arg(long, default_value_t = true)]
    stub: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Surface,
    Volume,
    Gradient,
    Threshold,
    Recovery,
    Ablation,
    Cost,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Check the configuration and certify every task solvable.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Execute the main (ε, λ) grid.
    Run {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Execute the four-profile fault-type ablation.
    Ablation {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compute metrics and emit report files from an episode log.
    Report {
        #[command(flatten)]
        config: ConfigArgs,
        /// Episode log to aggregate.
        #[arg(long)]
        log: PathBuf,
        /// Directory for CSV/Markdown/plot-data outputs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Which metric family to emit.
        #[arg(long, value_enum, default_value_t = Metric::All)]
        metric: Metric,
    },
    /// Re-verify every episode in a log from its recorded tool calls.
    Replay {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        log: PathBuf,
    },
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, String> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path).map_err(|e| format!("config {path:?}: {e}"))?,
        None => toml::from_str(DEFAULT_CONFIG).expect("built-in config parses"),
    };
    if let Some(seed) = args.seed {
        config.global_seed = seed;
    }
    if !args.agent.is_empty() {
        config.agent_ids = args.agent.clone();
    }
    if let Some(model) = &args.model {
        config.model_id = model.clone();
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn cmd_validate(args: &ConfigArgs) -> Result<(), String> {
    let config = load_config(args)?;
    let tasks = all_task_suites(config.global_seed);
    for task in &tasks {
        validate_task(task).map_err(|e| format!("{}: {e}", task.task_id))?;
        // Solvability: the scripted oracle must solve the task with no
        // faults injected.
        let mut session = FaultSession::new(
            build_profile(0.0).map_err(|e| e.to_string())?,
            &task.initial_state,
        );
        let mut rng = relibench::core::seed::episode_rng(
            config.global_seed,
            relibench::core::seed::SeedStream::Faults,
        );
        let traj = run_oracle(task, &mut session, &mut rng);
        let ok = verify(task, &task.initial_state, &traj.final_state)
            .map_err(|e| format!("{}: {e}", task.task_id))?;
        if !ok {
            return Err(format!("task {} is not oracle-solvable", task.task_id));
        }
    }
    println!(
        "ok: config valid, {} tasks registered and oracle-solvable",
        tasks.len()
    );
    Ok(())
}

fn with_parallelism<T>(n: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = n {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool builds");
        return pool.install(f);
    }
    #[cfg(not(feature = "parallel"))]
    if let Some(n) = n {
        if n > 1 {
            eprintln!("note: built without the `parallel` feature; running sequentially");
        }
    }
    f()
}

fn cmd_run(args: &RunArgs, ablation: bool) -> Result<(), String> {
    if !args.stub && cfg!(not(feature = "live")) {
        return Err("live model backends require the `live` build feature".to_string());
    }
    let mut config = load_config(&args.config)?;
    if ablation {
        config.suite_id = "ablation".to_string();
        config.epsilon_levels = vec![0.0];
        config.lambda_levels = vec![config.lambda_levels.last().copied().unwrap_or(0.2)];
        config.ablation_profile = Some(relibench::core::config::AblationName::Mixed);
    }
    let tasks = all_task_suites(config.global_seed);
    let plan = plan_experiment(&config, &tasks).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
    let log_path = args.out.join("episodes.jsonl");
    let report = with_parallelism(args.parallel, || {
        execute_plan(&plan, &config, &tasks, &log_path)
    })
    .map_err(|e| e.to_string())?;
    println!(
        "executed {} episodes ({} resumed, {} errored) -> {}",
        report.records.len(),
        report.skipped,
        report.errored.len(),
        log_path.display()
    );
    for (job, diag) in &report.errored {
        eprintln!("errored: {} trial {}: {diag}", job.task_id, job.trial_index);
    }
    let records = read_episode_log(&log_path).map_err(|e| e.to_string())?;
    emit_reports(&config, &records, Some(&args.out), Metric::All)
}

fn axis_levels(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let set: BTreeSet<u32> = values.map(|v| (v * 1000.0).round() as u32).collect();
    set.into_iter().map(|m| m as f64 / 1000.0).collect()
}

fn write_out(dir: Option<&Path>, name: &str, content: &str) -> Result<(), String> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        std::fs::write(dir.join(name), content).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn emit_reports(
    config: &RunConfig,
    records: &[EpisodeRecord],
    out: Option<&Path>,
    metric: Metric,
) -> Result<(), String> {
    let want = |m: Metric| metric == m || metric == Metric::All;
    let agents: BTreeSet<String> = records.iter().map(|r| r.agent_id.clone()).collect();
    let has_profiles = records.iter().any(|r| r.fault_profile.is_some());

    if !has_profiles {
        let k_values: Vec<usize> = (1..=config.k_trials as usize).collect();
        for agent in &agents {
            let subset: Vec<&EpisodeRecord> =
                records.iter().filter(|r| &r.agent_id == agent).collect();
            let observations: Vec<Observation> =
                subset.iter().map(|r| Observation::from(*r)).collect();
            let eps = axis_levels(subset.iter().map(|r| r.epsilon));
            let lam = axis_levels(subset.iter().map(|r| r.lambda_level));
            let surface = build_surface(&observations, &k_values, &eps, &lam)
                .map_err(|e| e.to_string())?;
            if want(Metric::Surface) {
                println!("## Reliability surface — {agent}\n");
                println!("{}", surface_markdown(&surface));
                write_out(out, &format!("surface_{agent}.csv"), &surface_csv(&surface))?;
                write_out(
                    out,
                    &format!("surface_{agent}.md"),
                    &surface_markdown(&surface),
                )?;
                write_out(
                    out,
                    &format!("plot_{agent}.csv"),
                    &surface_plot_data(&surface),
                )?;
            }
            if want(Metric::Volume) {
                let v = surface_volume(&surface).map_err(|e| e.to_string())?;
                println!("surface volume ({agent}): {:.4}", v);
            }
            if want(Metric::Gradient) {
                let k = *k_values.last().unwrap();
                for (axis, name, levels) in [
                    (Axis::Epsilon, "epsilon", &eps),
                    (Axis::Lambda, "lambda", &lam),
                ] {
                    if levels.len() >= 2 {
                        let g = degradation_gradient(&surface, k, 0.0, 0.0, axis)
                            .map_err(|e| e.to_string())?;
                        println!(
                            "degradation gradient at baseline along {name} ({agent}): {g:+.4} per unit"
                        );
                    }
                }
            }
            if want(Metric::Threshold) {
                match critical_threshold(&surface, config.theta) {
                    Some((k, e, l)) => println!(
                        "critical threshold θ={} ({agent}): first crossed at (k={k}, ε={e}, λ={l})",
                        config.theta
                    ),
                    None => println!(
                        "critical threshold θ={} ({agent}): never crossed",
                        config.theta
                    ),
                }
            }
        }
    }

    if want(Metric::Recovery) {
        for agent in &agents {
            let subset: Vec<EpisodeRecord> = records
                .iter()
                .filter(|r| &r.agent_id == agent)
                .cloned()
                .collect();
            let stats = recovery_stats(&subset);
            println!("## Fault recovery — {agent}\n\n{}", recovery_markdown(&stats));
            write_out(out, &format!("recovery_{agent}.md"), &recovery_markdown(&stats))?;
        }
    }

    if want(Metric::Ablation) && has_profiles {
        let rows = ablation_report(records).map_err(|e| e.to_string())?;
        println!("## Fault-type ablation\n\n{}", ablation_markdown(&rows));
        write_out(out, "ablation.csv", &ablation_csv(&rows))?;
        write_out(out, "ablation.md", &ablation_markdown(&rows))?;
    }

    if want(Metric::Cost) {
        let cost = aggregate_cost(records);
        println!("## Cost\n\n{}", cost_markdown(&cost));
        write_out(out, "cost.md", &cost_markdown(&cost))?;
    }
    Ok(())
}

fn cmd_report(
    args: &ConfigArgs,
    log: &Path,
    out: Option<&Path>,
    metric: Metric,
) -> Result<(), String> {
    let config = load_config(args)?;
    let records = read_episode_log(log).map_err(|e| e.to_string())?;
    if records.is_empty() {
        return Err("log contains no episodes".to_string());
    }
    emit_reports(&config, &records, out, metric)
}

fn cmd_replay(args: &ConfigArgs, log: &Path) -> Result<(), String> {
    let config = load_config(args)?;
    let records = read_episode_log(log).map_err(|e| e.to_string())?;
    let tasks = all_task_suites(config.global_seed);
    let mismatches = replay_log(&records, &tasks).map_err(|e| e.to_string())?;
    if mismatches.is_empty() {
        println!("replayed {} episodes: all verdicts match", records.len());
        Ok(())
    } else {
        for m in &mismatches {
            eprintln!("mismatch: task {} seed {}: {}", m.task_id, m.seed, m.detail);
        }
        Err(format!(
            "{} of {} episodes disagree on replay",
            mismatches.len(),
            records.len()
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { config } => cmd_validate(config),
        Command::Run { run } => cmd_run(run, false),
        Command::Ablation { run } => cmd_run(run, true),
        Command::Report {
            config,
            log,
            out,
            metric,
        } => cmd_report(config, log, out.as_deref(), *metric),
        Command::Replay { config, log } => cmd_replay(config, log),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
