//! `blinkwatch`: face and eye detection, drowsiness tracking over frame
//! directories, cascade training and BioID evaluation.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 bad data or failed training.

mod commands;
mod config;
mod error;
mod io;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{eval::EvalArgs, model::ModelCommand, train::TrainArgs};
use config::{RunConfig, SharedArgs};
use error::Result;

#[derive(Parser, Debug)]
#[command(name = "blinkwatch", version, about = "Driver drowsiness detection from eye and head-pose cues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect the face, both eyes and head pitch in one PGM image.
    Detect { image: PathBuf },
    /// Track drowsiness over a directory of PGM frames, in file-name order.
    Track { frames: PathBuf },
    /// Train a cascade from positive patches and negative images.
    Train(TrainArgs),
    /// Score detection on the BioID set (or on precomputed flags).
    Eval(EvalArgs),
    /// Convert or inspect cascade model files.
    #[command(subcommand)]
    Model(ModelCommand),
}

fn dispatch(cli: &Cli) -> Result<()> {
    if let Command::Model(cmd) = &cli.command {
        return commands::model::run(cmd);
    }
    let cfg = RunConfig::resolve(&cli.shared)?;
    log::debug!("effective config:\n{}", cfg.echo());
    match &cli.command {
        Command::Detect { image } => commands::detect::run(image, &cfg),
        Command::Track { frames } => commands::track::run(frames, &cfg),
        Command::Train(args) => commands::train::run(args, &cfg),
        Command::Eval(args) => commands::eval::run(args, &cfg),
        Command::Model(_) => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
