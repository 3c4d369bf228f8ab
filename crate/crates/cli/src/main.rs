use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use rlgames_cli::commands;
use rlgames_cli::config::{load_game, ExperimentConfig};
use rlgames_cli::verify::{self, VerifyOptions, CRITERIA};

#[derive(Parser)]
#[command(name = "rlgames", version, about = "Regularized learning in finite games and setwise stability of faces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibria, dominated actions and clubs of a game.
    Analyze {
        /// Built-in game name or path to a game JSON file.
        game: String,
    },
    /// One learning run from a config with a single initial point.
    Run {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Every point of the config's initialization grid, in parallel.
    Batch {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (defaults to RLGAMES_THREADS, then the core count).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the acceptance checks; exits nonzero if any fails.
    Verify {
        /// List the checks without running them.
        #[arg(long)]
        list: bool,
        /// Only run checks whose id matches or whose name contains this.
        #[arg(long)]
        filter: Option<String>,
        /// Game file to use in place of the built-in 4x4 game.
        #[arg(long)]
        vz: Option<PathBuf>,
    },
}

fn load_config(path: &Path) -> Result<rlgames_cli::config::Experiment> {
    let cfg = ExperimentConfig::from_path(path)?;
    cfg.resolve(path.parent())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { game } => {
            let g = load_game(&game, None)?;
            println!("{}", serde_json::to_string_pretty(&commands::analyze(&g)?)?);
        }
        Command::Run { config, out } => {
            let exp = load_config(&config)?;
            let report = commands::run(&exp, &out)?;
            eprintln!(
                "final distance to nearest tracked face {}; outputs in {}",
                report.min_final_distance.map_or("n/a".into(), |d| format!("{d:.3e}")),
                out.display()
            );
        }
        Command::Batch { config, out, threads } => {
            let report = commands::batch(&load_config(&config)?, Some(&out), threads)?;
            eprintln!(
                "{} runs, {:.1}% near a tracked face, {:.1}% resilient; summary in {}",
                report.runs.len(),
                100.0 * report.family_fraction,
                100.0 * report.resilient_fraction,
                out.join("summary.json").display()
            );
        }
        Command::Verify { list, filter, vz } => {
            if list {
                for c in &CRITERIA {
                    println!("{:>2} {} (budget {:.3} s)", c.id, c.name, c.budget.as_secs_f64());
                }
                return Ok(ExitCode::SUCCESS);
            }
            let opts = VerifyOptions { vz_path: vz };
            let outcomes = verify::run_all(filter.as_deref(), &opts);
            if outcomes.is_empty() {
                anyhow::bail!("no check matches {:?}", filter.unwrap_or_default());
            }
            for o in &outcomes {
                println!("{}", o.line());
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} passed, {failed} failed", outcomes.len() - failed);
            return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli).context("rlgames") {
        Ok(code) => code,
        Err(e) => {
            let chain: Vec<String> = e.chain().skip(1).map(ToString::to_string).collect();
            eprintln!("{}", serde_json::json!({ "error": chain.join(": ") }));
            ExitCode::from(2)
        }
    }
}
