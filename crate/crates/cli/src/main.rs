use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mgrit_core::harness::{emit_sweep, parse_config, run_self_checks, run_sweep, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mgrit", version, about = "Parallel-in-time MGRIT experiments for 1D conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the base configuration (sweep keys are ignored).
    Solve(RunArgs),
    /// Run every column of the configuration's sweep.
    Sweep(RunArgs),
    /// Run the built-in numerical self-checks.
    Verify,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV output; a `.meta` sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Threads for chunk-parallel relaxation.
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
}

fn load(args: &RunArgs, keep_sweep: bool) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut cfg = parse_config(&text).map_err(|e| format!("{}: {e}", args.config.display()))?;
    if let Some(p) = args.parallelism {
        cfg.mgrit.parallelism = p;
    }
    if let Some(n) = args.max_iters {
        cfg.mgrit.max_iters = n;
    }
    if !keep_sweep {
        cfg.sweep.clear();
        cfg.sweep_labels = None;
    } else if cfg.sweep.is_empty() {
        return Err(format!("{} has no sweep.* keys; use `solve`", args.config.display()));
    }
    Ok(cfg)
}

fn run(cfg: &ExperimentConfig, out: &Path) -> Result<(), String> {
    let sweep = run_sweep(cfg).map_err(|e| e.to_string())?;
    emit_sweep(&sweep, out).map_err(|e| e.to_string())?;
    for (name, outcome) in &sweep.columns {
        match outcome {
            Ok(r) => {
                let last = r.record.errors.iter().rev().find_map(|e| *e);
                let status = match r.record.diverged_at {
                    Some(it) => format!("diverged at iteration {it}"),
                    None => format!("final error {}", last.map_or("n/a".into(), |e| format!("{e:.3e}"))),
                };
                eprintln!("{name}: {status}");
            }
            Err(e) => eprintln!("{name}: failed: {e}"),
        }
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => load(args, false).and_then(|cfg| run(&cfg, &args.out)),
        Command::Sweep(args) => load(args, true).and_then(|cfg| run(&cfg, &args.out)),
        Command::Verify => {
            let checks = run_self_checks();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err("self-checks failed".into())
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
