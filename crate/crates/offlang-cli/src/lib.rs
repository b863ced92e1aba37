//! Command-line pipeline runner around `offlang-core`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Usage errors print a
//! synopsis to standard error; every file-producing command writes a
//! `<out>.manifest.json` beside its primary output so runs can be reproduced
//! byte for byte.

pub mod args;
pub mod commands;
pub mod io;
pub mod manifest;

use std::fmt;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let seed = cli.seed;
    let result = match &cli.command {
        Command::Preprocess(args) => commands::preprocess(args),
        Command::Stats(args) => commands::stats(args),
        Command::Validate(args) => commands::validate(args),
        Command::Balance(args) => commands::balance(args, seed),
        Command::Pairs(args) => commands::pairs(args, seed),
        Command::Train(args) => commands::train(args, seed),
        Command::Eval(args) => commands::eval(args),
        Command::Baseline(args) => commands::baseline(args),
        Command::Ensemble(args) => commands::ensemble(args),
        Command::Project(args) => commands::project(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `offlang --help` (or `offlang <command> --help`) for usage");
            1
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
