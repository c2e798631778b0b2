//! `snh`: solves, sweeps, singular tables, verification and fits from the
//! command line.

mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let jobs = match &cli.command {
        Command::Ground { common, .. }
        | Command::Excited { common, .. }
        | Command::Singular { common, .. }
        | Command::Sweep { common, .. } => common.jobs,
        Command::Verify { .. } | Command::Fit { .. } => None,
    };
    if let Some(jobs) = jobs {
        if jobs == 0 {
            eprintln!("snh: usage: --jobs must be at least 1");
            return ExitCode::from(64);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("snh: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("snh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
