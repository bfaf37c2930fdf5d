//! Command-line front end for the characteristic-coordinate wave solver.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error (message
//! carries the offending line number), 3 solver failure (the error's name is
//! also left in `report.json` when the output directory is known).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use charwave::cli;
use charwave::Error;

#[derive(Parser)]
#[command(
    name = "charwave",
    about = "Characteristic-coordinate solver for the variational wave equation u_tt - c(u)(c(u)u_x)_x = 0",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute one run and write grid.csv, frames.csv, energy.csv, report.json.
    Run { config: PathBuf },
    /// Repeat the run over the solver.h list and write convergence.csv.
    Convergence { config: PathBuf },
    /// Run conservative and sharp modes side by side and write compare.csv.
    Compare { config: PathBuf },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let res = match args.cmd {
        Cmd::Run { config } => cli::cmd_run(&config),
        Cmd::Convergence { config } => cli::cmd_convergence(&config),
        Cmd::Compare { config } => cli::cmd_compare(&config),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("charwave: {e}");
            ExitCode::from(match e {
                Error::Config { .. } => 2,
                Error::Io(_) => 1,
                _ => 3,
            })
        }
    }
}
