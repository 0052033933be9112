//! `ud-realize`: train models, realize UD treebanks and evaluate output.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Why a command failed, which decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {}", m),
            Failure::Data(e) => write!(f, "error: {:#}", e),
            Failure::Internal(e) => write!(f, "internal error: {:#}", e),
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::TrainLm(a) => commands::train_lm_cmd(a),
        Command::TrainReinflector(a) => commands::train_reinflector_cmd(a),
        Command::Realize(a) => commands::realize_cmd(a),
        Command::Evaluate(a) => commands::evaluate_cmd(a),
        Command::Reorder(a) => commands::reorder_cmd(a),
        Command::Reinflect(a) => commands::reinflect_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("{}", f);
            ExitCode::from(f.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
