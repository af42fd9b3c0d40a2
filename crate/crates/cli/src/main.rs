//! `sentio`: batch pipeline from raw tweets to classification reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numeric failure.

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use crate::config::{parse_override, resolve};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "sentio", version, about = "Tweet sentiment pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Input file or directory; defaults to `paths.input`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output directory; defaults to `paths.out_dir`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Seed for every randomised stage.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override a config value, e.g. `--set model.cnn.epochs=5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a `text,sentiment` CSV.
    Clean,
    /// Shuffle a CSV into train/val/test.
    Split,
    /// Fit the document-term vocabulary on a split directory.
    Featurize,
    /// Train naive Bayes on a featurize directory.
    TrainNb,
    /// Train the convolutional classifier on a split directory.
    TrainCnn,
    /// Train the BiLSTM classifier on a split directory.
    TrainBilstm,
    /// Train word embeddings.
    TrainEmbed,
    /// WordPiece-encode a CSV for a BERT-style model.
    BertPrep,
    /// Report on a trained model's held-out predictions.
    Evaluate,
    /// Merge corpus statistics and evaluations from a run manifest.
    Report {
        /// Run manifest JSON.
        #[arg(long)]
        from: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let overrides = c.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
    let resolved = resolve(c.config.as_deref(), &overrides, c.seed)?;
    for (key, value) in &resolved.defaults {
        info!("default {key} = {value}");
    }
    let cfg = resolved.config;
    let out = c
        .output
        .clone()
        .or_else(|| cfg.paths.out_dir.clone())
        .ok_or_else(|| CliError::Usage("no output directory: pass --output or set paths.out_dir".into()))?;
    let input = match &cli.command {
        Command::Report { from } => from.clone(),
        _ => c
            .input
            .clone()
            .or_else(|| cfg.paths.input.clone())
            .ok_or_else(|| CliError::Usage("no input: pass --input or set paths.input".into()))?,
    };
    if !input.exists() {
        return Err(CliError::data(format!("{}: not found", input.display())));
    }
    artifacts::ensure_dir(&out)?;
    artifacts::write_json(&out.join(artifacts::CONFIG), &cfg)?;

    let (i, o) = (input.as_path(), out.as_path());
    match cli.command {
        Command::Clean => commands::clean(&cfg, i, o),
        Command::Split => commands::split(&cfg, i, o),
        Command::Featurize => commands::featurize(&cfg, i, o),
        Command::TrainNb => commands::train_nb(&cfg, i, o),
        Command::TrainCnn => commands::train_cnn(&cfg, i, o),
        Command::TrainBilstm => commands::train_bilstm(&cfg, i, o),
        Command::TrainEmbed => commands::train_embed(&cfg, i, o),
        Command::BertPrep => commands::bert_prep(&cfg, i, o),
        Command::Evaluate => commands::evaluate(&cfg, i, o),
        Command::Report { .. } => commands::report(&cfg, i, o),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.common.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info })
        .format_timestamp(None)
        .format_target(false)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
