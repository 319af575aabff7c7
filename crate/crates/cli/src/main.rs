//! `frameorbit` command-line front end.
//!
//! Exit codes: 0 on success, 1 when an input cannot be read or parsed (or
//! the command line is malformed), 2 when a mathematical hypothesis fails.

mod args;
mod commands;
mod report;

use std::fs;
use std::process::ExitCode;

use clap::Parser;
use clap::error::ErrorKind;

use args::Cli;
use report::{Inputs, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Core(frameorbit::Error),
    Hypothesis(String),
    Internal(String),
}

impl From<frameorbit::Error> for Failure {
    fn from(e: frameorbit::Error) -> Self {
        if e.is_parse_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Core(e)
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Input(_) | Failure::Internal(_) => 1,
            Failure::Core(_) | Failure::Hypothesis(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Hypothesis(m) | Failure::Internal(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let config = RunConfig::from_options(&cli.opts)?;
    let mut inputs = Inputs::default();
    let output = commands::run(&cli.command, &config, &mut inputs)?;
    let text = report::render(commands::name(&cli.command), &inputs, &config, &output)?;
    match &cli.opts.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    match output.failure {
        Some(m) => Err(Failure::Hypothesis(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
