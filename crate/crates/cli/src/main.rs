mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use donor_drp::Error;

use crate::{
    args::{Cli, Command},
    commands::{Context, Failure},
    config::{resolve_species, RunConfig},
};

fn run(cli: Cli) -> Result<String, Failure> {
    let config = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let species = resolve_species(
        cli.common.species.as_deref(),
        config.species.as_ref(),
        cli.common.gamma_e.or(config.gamma_e),
    )?;
    let output = cli
        .common
        .output
        .clone()
        .or_else(|| config.output.as_ref().map(Into::into));
    let ctx = Context {
        species,
        config,
        output,
    };
    match &cli.command {
        Command::Levels(a) => commands::levels(&ctx, a),
        Command::Transitions(a) => commands::transitions(&ctx, a),
        Command::Magic(a) => commands::magic(&ctx, a),
        Command::Echo(a) => commands::echo(&ctx, a),
        Command::Decay(a) => commands::decay(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure { error, listing }) => {
            eprintln!("error: {error}");
            if let Some(list) = listing {
                eprint!("{list}");
            }
            ExitCode::from(match error {
                Error::UnknownTransition(_) => 2,
                Error::Numeric { .. } => 3,
                _ => 1,
            })
        }
    }
}
