//! The `skysense` command line: training, evaluation, sweeps, gradient
//! verification, and plot-data export.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::harness::{
    build_agents, load_checkpoint, load_config, measure_random_baseline, parse_rewards,
    run_evaluation, run_training, standard_gradient_checks, sweep_with_mode, CheckpointError,
    ExperimentConfig, HarnessError, SweepAxis,
};

/// Environment variable naming the root directory for run outputs.
pub const OUTPUT_ROOT_ENV: &str = "SKYSENSE_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "skysense",
    version,
    about = "Multi-UAV crowdsensing simulator and multi-agent PPO trainer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct ConfigArgs {
    /// Path to a TOML experiment config (defaults apply when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-path config override, repeatable (e.g. --set sim.num_users=8).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config and SKYSENSE_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a policy and emit metrics, reward series, and a checkpoint.
    Train {
        #[command(flatten)]
        common: ConfigArgs,
        /// Parallel rollout workers.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate a checkpoint with the deterministic policy.
    Eval {
        #[command(flatten)]
        common: ConfigArgs,
        /// Checkpoint file written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Evaluation episodes.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Train across an axis and report median processed data per value.
    Sweep {
        #[command(flatten)]
        common: ConfigArgs,
        /// Sweep axis: uav_count or uav_frequency.
        #[arg(long)]
        axis: String,
        /// Ascending axis values, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Seeds (defaults to three consecutive seeds from the master seed).
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Episode budget per sweep run (overrides max_episodes).
        #[arg(long)]
        episodes: Option<usize>,
        /// Train one policy per seed on the base config and evaluate it at
        /// every axis value (common random numbers across values).
        #[arg(long)]
        reuse_policy: bool,
    },
    /// Verify analytic gradients against central finite differences.
    Gradcheck {
        /// Maximum allowed relative error.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        /// Random configurations per component family.
        #[arg(long, default_value_t = 100)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convert run outputs into per-figure data tables.
    ExportPlots {
        /// Run directory produced by `train` or `sweep`, repeatable.
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        /// Destination directory for the figure tables.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure the uniform-random-policy baseline for a config.
    Baseline {
        #[command(flatten)]
        common: ConfigArgs,
        /// Baseline episodes.
        #[arg(long, default_value_t = 200)]
        episodes: usize,
    },
}

fn resolve_config(args: &ConfigArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("sim.seed={seed}"));
    }
    let mut cfg = load_config(args.config.as_deref(), &overrides)?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.display().to_string();
    } else if let Ok(root) = std::env::var(OUTPUT_ROOT_ENV) {
        cfg.output_dir = Path::new(&root).join(&cfg.output_dir).display().to_string();
    }
    Ok(cfg)
}

fn exit_code(err: &HarnessError) -> i32 {
    match err {
        HarnessError::Config(_) | HarnessError::Experiment(_) => 1,
        HarnessError::Checkpoint(
            CheckpointError::ConfigMismatch { .. }
            | CheckpointError::ShapeMismatch { .. }
            | CheckpointError::MissingArray(_)
            | CheckpointError::UnexpectedArray(_),
        ) => 1,
        _ => 2,
    }
}

fn cmd_train(common: ConfigArgs, workers: Option<usize>) -> Result<(), HarnessError> {
    let mut cfg = resolve_config(&common)?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    let outcome = run_training(&cfg)?;
    let last = outcome.metrics.last().expect("training always evaluates at least once");
    println!(
        "trained {} episodes (variant {}, seed {})",
        cfg.max_episodes,
        cfg.variant.name(),
        cfg.seed()
    );
    println!(
        "final eval: user reward {:.4}, uav reward {:.4}, processed {:.4} Mbit",
        last.mean_user_reward, last.mean_uav_reward, last.processed_mbits
    );
    println!("metrics: {}", outcome.metrics_path.display());
    println!("rewards: {}", outcome.rewards_path.display());
    println!("checkpoint: {}", outcome.checkpoint_path.display());
    Ok(())
}

fn cmd_eval(
    common: ConfigArgs,
    checkpoint: PathBuf,
    episodes: Option<usize>,
) -> Result<(), HarnessError> {
    let cfg = resolve_config(&common)?;
    let mut agents = build_agents(&cfg.sim, cfg.variant)?;
    load_checkpoint(&checkpoint, cfg.variant, &cfg.sim, &mut agents)?;
    let episodes = episodes.unwrap_or(cfg.eval_episodes);
    let out = run_evaluation(&agents, &cfg, episodes, 0);
    println!(
        "episodes,mean_user_reward,mean_uav_reward,processed_Mbits,uav_processed_Mbits,\
energy_violations,boundary_violations,collision_violations"
    );
    println!(
        "{episodes},{},{},{},{},{},{},{}",
        out.mean_user_reward,
        out.mean_uav_reward,
        out.processed_mbits,
        out.uav_processed_mbits,
        out.energy_violations,
        out.boundary_violations,
        out.collision_violations
    );
    Ok(())
}

fn cmd_sweep(
    common: ConfigArgs,
    axis: String,
    values: Vec<f64>,
    seeds: Vec<u64>,
    episodes: Option<usize>,
    reuse_policy: bool,
) -> Result<(), HarnessError> {
    let axis: SweepAxis = axis.parse().map_err(HarnessError::Sweep)?;
    let mut cfg = resolve_config(&common)?;
    if let Some(e) = episodes {
        cfg.max_episodes = e;
    }
    let seeds: Vec<u64> =
        if seeds.is_empty() { (0..3).map(|i| cfg.seed() + i).collect() } else { seeds };
    let table = sweep_with_mode(&cfg, axis, &values, &seeds, reuse_policy)?;
    print!("{}", table.to_csv());
    Ok(())
}

fn cmd_gradcheck(tolerance: f64, draws: usize, seed: u64) -> i32 {
    let mut failed = false;
    for family in standard_gradient_checks(draws, seed) {
        let ok = family.passed(tolerance);
        failed |= !ok;
        println!(
            "{} {:<18} draws {:>4}  max rel err {:.3e}",
            if ok { "pass" } else { "FAIL" },
            family.family,
            family.draws,
            family.report.max_rel_err()
        );
    }
    if failed {
        2
    } else {
        0
    }
}

fn cmd_baseline(common: ConfigArgs, episodes: usize) -> Result<(), HarnessError> {
    let cfg = resolve_config(&common)?;
    cfg.validate()?;
    let baseline = measure_random_baseline(&cfg, episodes);
    println!("episodes,mean_total_reward,mean_processed_Mbits");
    println!("{episodes},{},{}", baseline.mean_total_reward, baseline.mean_processed_mbits);
    Ok(())
}

fn cmd_export_plots(runs: Vec<PathBuf>, out: Option<PathBuf>) -> Result<(), HarnessError> {
    let dest = out.unwrap_or_else(|| PathBuf::from("plots"));
    std::fs::create_dir_all(&dest)?;

    // Reward-vs-episode tables, one column per run.
    let mut reward_series = Vec::new();
    for run in &runs {
        let path = run.join("rewards.csv");
        if path.exists() {
            let name = run
                .file_name()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "run".into());
            reward_series.push((name, parse_rewards(&path)?));
        }
    }
    if !reward_series.is_empty() {
        let rows = reward_series.iter().map(|(_, s)| s.len()).min().unwrap_or(0);
        for (fname, user_column) in
            [("user_reward_vs_episode.csv", true), ("uav_reward_vs_episode.csv", false)]
        {
            let mut text = String::from("episode");
            for (name, _) in &reward_series {
                text.push_str(&format!(",{name}"));
            }
            text.push('\n');
            for i in 0..rows {
                text.push_str(&reward_series[0].1[i].episode.to_string());
                for (_, series) in &reward_series {
                    let r = &series[i];
                    let v = if user_column { r.mean_user } else { r.mean_uav };
                    text.push_str(&format!(",{v}"));
                }
                text.push('\n');
            }
            std::fs::write(dest.join(fname), text)?;
        }
    }

    // Processed-data-vs-axis tables from sweep outputs.
    for run in &runs {
        for axis in ["uav_count", "uav_frequency"] {
            let path = run.join(format!("sweep_{axis}.csv"));
            if path.exists() {
                std::fs::copy(&path, dest.join(format!("processed_vs_{axis}.csv")))?;
            }
        }
    }
    println!("wrote figure tables to {}", dest.display());
    Ok(())
}

/// Parses arguments and runs the requested command, returning the process
/// exit status (0 success, 1 config error, 2 runtime failure).
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outputs; anything else is a
            // usage error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Train { common, workers } => cmd_train(common, workers),
        Command::Eval { common, checkpoint, episodes } => cmd_eval(common, checkpoint, episodes),
        Command::Sweep { common, axis, values, seeds, episodes, reuse_policy } => {
            cmd_sweep(common, axis, values, seeds, episodes, reuse_policy)
        }
        Command::Gradcheck { tolerance, draws, seed } => {
            return cmd_gradcheck(tolerance, draws, seed)
        }
        Command::ExportPlots { runs, out } => cmd_export_plots(runs, out),
        Command::Baseline { common, episodes } => cmd_baseline(common, episodes),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_verbs_and_flags_exit_one() {
        assert_eq!(dispatch(["skysense", "frobnicate"]), 1);
        assert_eq!(dispatch(["skysense", "train", "--bogus-flag"]), 1);
        assert_eq!(dispatch(["skysense"]), 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(dispatch(["skysense", "--help"]), 0);
        assert_eq!(dispatch(["skysense", "train", "--help"]), 0);
    }

    #[test]
    fn config_errors_exit_one() {
        assert_eq!(dispatch(["skysense", "train", "--set", "sim.clip_epsilon=7"]), 1);
        assert_eq!(dispatch(["skysense", "baseline", "--set", "bogus_key=1", "--episodes", "1"]), 1);
    }
}
