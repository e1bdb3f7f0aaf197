mod args;
mod commands;
mod data;

use std::process::ExitCode;

use clap::Parser;
use gresnet::model::ModelError;

use args::{Cli, Command};

/// An error together with the process exit code it maps to.
pub struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    pub const USAGE: u8 = 2;
    pub const DATA: u8 = 3;
    pub const NUMERIC: u8 = 4;

    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Self::new(Self::DATA, error)
    }

    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self::new(Self::USAGE, error)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self::new(1, error)
    }
}

impl From<std::io::Error> for Failure {
    fn from(error: std::io::Error) -> Self {
        Self::new(1, error)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = match &e {
            ModelError::Config(_) => Self::USAGE,
            ModelError::EmptySplit(_) | ModelError::OverlappingSplits(_) | ModelError::NodeCount { .. } => {
                Self::DATA
            }
            ModelError::NonFiniteLoss { last_probe, .. } => {
                match last_probe {
                    Some(p) => match serde_json::to_string(p) {
                        Ok(json) => eprintln!("last gradient-norm probe: {json}"),
                        Err(err) => eprintln!("last gradient-norm probe unavailable: {err}"),
                    },
                    None => eprintln!("no gradient-norm probe was taken before the failure"),
                }
                Self::NUMERIC
            }
            _ => 1,
        };
        Self::new(code, e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Limit(a) => commands::limit(a),
        Command::Bound(a) => commands::bound(a),
        Command::Probe(a) => commands::probe(a),
        Command::Distance(a) => commands::distance(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            // Error types that embed their source in the message would
            // otherwise be printed twice.
            let mut message = f.error.to_string();
            for cause in f.error.chain().skip(1) {
                let cause = cause.to_string();
                if !message.contains(&cause) {
                    message = format!("{message}: {cause}");
                }
            }
            eprintln!("error: {message}");
            ExitCode::from(f.code)
        }
    }
}
