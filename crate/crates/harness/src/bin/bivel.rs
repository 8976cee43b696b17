use std::path::PathBuf;
use std::process::ExitCode;

use bivelocity_harness::config::{parse_config, ScenarioConfig};
use bivelocity_harness::runner::{run_scenario, run_sweep, RunError};
use bivelocity_harness::{check, scenarios};
use clap::{Args, Parser, Subcommand};

/// Bivelocity hydrodynamics laboratory.
#[derive(Parser)]
#[command(name = "bivel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario file.
    #[arg(required_unless_present = "scenario", conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario instead of a file.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory (defaults to `[output] directory`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; configs with `[sweep]` axes run as a sweep.
    Run(Source),
    /// Run every point of a sweep concurrently and write the summary.
    Sweep(Source),
    /// List the built-in scenarios.
    List,
    /// Print a built-in scenario's description and file.
    Describe { name: String },
    /// Run the mechanical and entropy property suite.
    Check,
}

fn load(src: &Source) -> Result<(ScenarioConfig, PathBuf), String> {
    let cfg = match (&src.config, &src.scenario) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        (None, Some(name)) => scenarios::load(name).map_err(|e| e.to_string())?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let out = src.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    Ok((cfg, out))
}

fn report(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_divergence() {
        ExitCode::from(3)
    } else {
        ExitCode::FAILURE
    }
}

fn sweep(cfg: &ScenarioConfig, out: &std::path::Path) -> ExitCode {
    match run_sweep(cfg, out) {
        Ok(r) => {
            println!("{} runs written to {}", r.runs.len(), r.directory.display());
            for s in &r.slopes {
                match s.slope {
                    Some(v) => println!("  {:<28} slope {v:.4} (expected {})", s.term, s.expected_order),
                    None => println!("  {:<28} too few points for a slope", s.term),
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => report(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", scenarios::list());
            ExitCode::SUCCESS
        }
        Command::Describe { name } => match scenarios::describe(&name) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Check => {
            let results = check::run_all();
            print!("{}", check::table(&results));
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Run(src) => match load(&src) {
            Ok((cfg, out)) if !cfg.sweep.is_empty() => sweep(&cfg, &out),
            Ok((cfg, out)) => match run_scenario(&cfg, &out) {
                Ok(o) => {
                    println!("{} written to {}", cfg.analysis, o.directory.display());
                    for (k, v) in &o.metrics {
                        println!("  {k:<36} {v:e}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => report(e),
            },
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Sweep(src) => match load(&src) {
            Ok((cfg, _)) if cfg.sweep.is_empty() => {
                eprintln!("error: config has no [sweep] axes; use `bivel run`");
                ExitCode::FAILURE
            }
            Ok((cfg, out)) => sweep(&cfg, &out),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
