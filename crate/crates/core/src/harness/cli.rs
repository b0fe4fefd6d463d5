use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::RunConfig;
use super::pipeline::Pipeline;
use crate::corpus::CategoryPair;
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "lexcat", version, about = "Novel-word category learning experiments on a toy masked language model")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Run configuration: a TOML file, or `default` for the built-ins.
    #[arg(long, global = true, default_value = "default")]
    config: String,

    /// Comma-separated seeds, overriding the configuration.
    #[arg(long, global = true, value_delimiter = ',')]
    seed: Option<Vec<u64>>,

    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated category pairs such as `noun-verb`.
    #[arg(long, global = true, value_delimiter = ',')]
    pairs: Option<Vec<CategoryPair>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the lexicon, training corpus and held-out items.
    Gen,
    /// Train the base model.
    Train,
    /// Teach novel words from single exposures, for every pair and seed.
    Ks,
    /// Sample novel embeddings from category regions and evaluate them untrained.
    Project,
    /// Write the results table, summary and figures.
    Report,
    /// Run every stage in order.
    All,
}

fn run(cli: Cli) -> Result<()> {
    let mut config = RunConfig::load(&cli.config)?;
    if let Some(seeds) = cli.seed {
        config.seeds = seeds;
    }
    if let Some(pairs) = cli.pairs {
        config.pairs = pairs;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    config.validate()?;
    let pipeline = Pipeline::new(config.clone(), config.out_dir.clone());
    match cli.command {
        Command::Gen => pipeline.gen(),
        Command::Train => pipeline.train().map(drop),
        Command::Ks => pipeline.ks().map(drop),
        Command::Project => pipeline.project().map(drop),
        Command::Report => pipeline.report().map(drop),
        Command::All => pipeline.all().map(drop),
    }
}

/// Parses `argv` (program name first), runs the requested stage and returns
/// the process exit code. Usage problems exit with 2, failures with 1.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
