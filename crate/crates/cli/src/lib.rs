//! Batch entry point: feature extraction, experiments, agreement, corpus
//! validation, synthetic corpora and the session service.

pub mod cache;
pub mod commands;
pub mod config;
mod error;

use clap::{Parser, Subcommand};

pub use error::{CliError, EXIT_FAILURE};

#[derive(Debug, Parser)]
#[command(name = "certainty", version, about = "Prosodic certainty experiments")]
pub struct Cli {
    /// Repeat for more log output on stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the 60 scoped prosodic features per utterance as CSV.
    Extract(commands::ExtractArgs),
    /// Run one experiment and write report.json and report.txt.
    Experiment(commands::ExperimentArgs),
    /// Inter-rater agreement on the listener ratings.
    Agreement(config::RunArgs),
    /// Check a manifest and all of its audio.
    Validate(commands::ValidateArgs),
    /// Run the session service.
    Serve(commands::ServeArgs),
    /// Generate a synthetic study corpus.
    Synth(commands::SynthArgs),
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Extract(a) => commands::extract(a).map(drop),
        Command::Experiment(a) => commands::experiment(a).map(drop),
        Command::Agreement(a) => commands::agreement(a).map(drop),
        Command::Validate(a) => {
            println!("{}", commands::validate(a)?);
            Ok(())
        }
        Command::Serve(a) => commands::serve(a),
        Command::Synth(a) => {
            println!("{}", commands::synth(a)?.display());
            Ok(())
        }
    }
}
