//! `aero` experiment runner.
//!
//! Exit codes: 0 success, 1 config error, 2 runtime or check failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aero_core::experiment::{self, ExperimentConfig, ExperimentError};
use aero_core::verify;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aero", version, about = "Adaptive rollout allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its series and summary files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several experiments on the same pool and tabulate them.
    Compare {
        #[arg(long = "config", required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in analytic checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: &Path, seed: Option<u64>, out: &Option<PathBuf>) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), ExperimentError> {
    let cfg = load(&config, seed, &out)?;
    let output = experiment::run_experiment(&cfg)?;
    let files = experiment::write_run(&cfg.output.dir, &output)?;
    let s = &output.summary;
    println!(
        "{}: {} steps, generated {}, trained {}, mean group size {:.3}, training FLOPs/step {:.4e}",
        s.name, s.steps, s.generated, s.trained, s.mean_group_size, s.per_step_training_flops
    );
    println!("wrote {}", files.series.display());
    println!("wrote {}", files.summary.display());
    if let Some(trace) = files.trace {
        println!("wrote {}", trace.display());
    }
    Ok(())
}

fn compare(paths: Vec<PathBuf>, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), ExperimentError> {
    let configs = paths.iter().map(|p| load(p, seed, &out)).collect::<Result<Vec<_>, _>>()?;
    let rows = experiment::compare(&configs)?;
    let table = experiment::comparison_csv(&rows)?;
    print!("{table}");
    let dir = out.unwrap_or_else(|| configs[0].output.dir.clone());
    std::fs::create_dir_all(&dir)
        .map_err(|e| ExperimentError::Io { path: dir.display().to_string(), message: e.to_string() })?;
    let path = dir.join("compare.csv");
    std::fs::write(&path, table)
        .map_err(|e| ExperimentError::Io { path: path.display().to_string(), message: e.to_string() })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out } => run(config, seed, out),
        Command::Compare { configs, seed, out } => compare(configs, seed, out),
        Command::Verify { seed } => {
            let checks = verify::run_all(seed);
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return if checks.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::from(2) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
