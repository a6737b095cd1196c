use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fbsde_cli::{execute, RunOptions, EXPERIMENTS};
use fbsde_core::BUILTIN_MODELS;

#[derive(Parser)]
#[command(
    name = "fbsde-lab",
    version,
    about = "Run degenerate-FBSDE experiments and write CSV results"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Print pass/fail per acceptance check; exit 3 on any failure.
        #[arg(long)]
        check: bool,
        /// Directory for the CSV outputs (overrides the directory part of output_path).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    ListModels,
    ListExperiments,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListModels => {
            for m in BUILTIN_MODELS {
                println!("{m}");
            }
            ExitCode::SUCCESS
        }
        Command::ListExperiments => {
            for e in EXPERIMENTS {
                println!("{e}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            check,
            out_dir,
            threads,
        } => match execute(&RunOptions {
            config,
            out_dir,
            check,
            threads,
        }) {
            Ok(report) => {
                for p in &report.written {
                    eprintln!("wrote {}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
