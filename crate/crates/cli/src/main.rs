mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

const EXIT_INVALID: u8 = 2;
const EXIT_ACCURACY: u8 = 3;
const EXIT_IO: u8 = 4;

/// CLI failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Accuracy(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Accuracy(_) => EXIT_ACCURACY,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Accuracy(m) | CliError::Io(m) => m,
        }
    }
}

impl From<resonant_core::Error> for CliError {
    fn from(err: resonant_core::Error) -> Self {
        use resonant_core::Error::*;
        match err {
            InvalidModel(m) | InvalidArgument(m) => CliError::Invalid(m),
            Integrity(m) | Accuracy(m) => CliError::Accuracy(m),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let default_out = format!("{name}.csv");

    let result = config::resolve(cli.command.args(), &default_out).and_then(|cfg| {
        let summary = match &cli.command {
            Command::Fig1(_) => commands::fig1(&cfg),
            Command::Fig2(_) => commands::fig2(&cfg),
            Command::Fig3(_) => commands::fig3(&cfg),
            Command::Evolve(_) => commands::evolve(&cfg),
        }?;
        println!("wrote {} ({} rows)", cfg.out.display(), summary.rows);
        Ok(())
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
