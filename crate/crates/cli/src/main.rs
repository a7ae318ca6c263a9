mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, PipelineConfig};
use stages::Stage;

/// Topic classification of wiki articles from their outlinks.
#[derive(Parser)]
#[command(name = "linktopic", version)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run even if upstream outputs are missing a manifest or are stale.
    #[arg(long, global = true)]
    force: bool,
    /// Overrides the training seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the number of training threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the decision threshold.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one bag of linked entity IDs per article.
    Ingest,
    /// Derive topic labels from project assessments.
    Labels,
    /// Assign labeled entities to train, validation and test splits.
    Split,
    /// Train the classifier on the train split.
    Train,
    /// Write above-threshold topics for the evaluation split.
    Predict,
    /// Score the model on the evaluation split.
    Evaluate,
    /// Write the outlink-count histogram.
    Stats,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        threshold: cli.threshold,
    };
    let config = PipelineConfig::load(cli.config.as_deref(), &overrides)?;
    let ctx = Stage {
        config: &config,
        force: cli.force,
    };
    match cli.command {
        Command::Ingest => stages::cmd_ingest(&ctx),
        Command::Labels => stages::cmd_labels(&ctx),
        Command::Split => stages::cmd_split(&ctx),
        Command::Train => stages::cmd_train(&ctx),
        Command::Predict => stages::cmd_predict(&ctx),
        Command::Evaluate => stages::cmd_evaluate(&ctx),
        Command::Stats => stages::cmd_stats(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
