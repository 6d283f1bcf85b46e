mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use ssm_backbone::{Error, ErrorKind};

use args::{Cli, Command};

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numerical => 4,
        ErrorKind::Internal => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::FitBackbone(a) => commands::fit_backbone(a),
        Command::Embed(a) => commands::embed(a),
        Command::Fit(a) => commands::fit(a),
        Command::Spectral(a) => commands::spectral(a),
        Command::Ssm(a) => commands::ssm(a),
        Command::Backbone(a) => commands::backbone(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
