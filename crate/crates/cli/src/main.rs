use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use factual_cli::{load, run_manifest, summarize};
use factual_risk::{format_event_log, simulate_game, Board, DEFAULT_PLAYERS};

/// Situation representation by factual agents.
#[derive(Parser)]
#[command(name = "factual", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the engine over the manifest's input and write trace, cluster
    /// timeline and final snapshot.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Write outputs here instead of the manifest's `output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check every input of a manifest without running.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Summarize a trace file.
    Report {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Generate a seeded Risk event log.
    Simulate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        /// Board file; the classic map by default.
        #[arg(long)]
        board: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { manifest, output_dir } => match run_manifest(&manifest, output_dir.as_deref()) {
            Ok(s) => {
                println!(
                    "{} ticks, {} agents, {} events, {} clusters at the final tick; outputs in {}",
                    s.ticks,
                    s.agents,
                    s.events,
                    s.final_clusters,
                    s.output_dir.display()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                if let factual_cli::RunError::Invalid(findings) = &e {
                    for f in findings {
                        eprintln!("error: {f}");
                    }
                } else {
                    eprintln!("error: {e}");
                }
                ExitCode::from(e.exit_code())
            }
        },
        Command::Validate { manifest } => match load(&manifest) {
            Ok(_) => ExitCode::SUCCESS,
            Err(findings) => {
                for f in findings {
                    println!("{f}");
                }
                ExitCode::from(1)
            }
        },
        Command::Report { trace } => match std::fs::read_to_string(&trace) {
            Ok(text) => {
                let r = summarize(&text);
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
                print!("{}", r.text);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {}: {e}", trace.display());
                ExitCode::from(1)
            }
        },
        Command::Simulate { seed, steps, out, board } => match simulate(seed, steps, &out, board) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}

fn simulate(seed: u64, steps: usize, out: &std::path::Path, board: Option<PathBuf>) -> anyhow::Result<()> {
    let board = match board {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            Board::parse(&text).with_context(|| format!("loading {}", p.display()))?
        }
        None => Board::classic(),
    };
    let log = simulate_game(&board, &DEFAULT_PLAYERS, seed, steps);
    std::fs::write(out, format_event_log(&log)).with_context(|| format!("writing {}", out.display()))
}
