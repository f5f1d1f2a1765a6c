//! `sentfolio`: runs the sentiment-aware portfolio pipeline stage by stage.

mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use config::{parse_window, Context};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "sentfolio", version, about = "Sentiment-aware LSTM portfolio pipeline")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "sentfolio.toml")]
    config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restricts backtests to dates FROM,TO inside the test segment.
    #[arg(long, global = true, value_name = "FROM,TO", value_parser = parse_window)]
    down_market: Option<(NaiveDate, NaiveDate)>,
    /// Overrides the config's output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Align prices and sentiment into a panel and fix the split.
    Ingest,
    /// Score every sentiment text with the lexicon.
    Label,
    /// Weekly sentiment correlations and Granger tests.
    Analyze,
    /// Train the LSTM forecasters for every replicate seed.
    Train,
    /// Backtest every strategy over the test segment.
    Backtest,
    /// Strategy table and the paired replicate test.
    Report,
    /// Monte-Carlo portfolios on training-period moments.
    Frontier,
    /// Compare lexicon labels against a hand-labeled sample.
    Audit,
    /// Write a synthetic sentiment-driven market fixture.
    Synth(commands::SynthArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Command::Synth(args) = &cli.command {
        return commands::synth(args);
    }
    let ctx = Context::load(&cli.config, cli.seed, cli.out.as_deref(), cli.down_market)?;
    match cli.command {
        Command::Ingest => commands::ingest(&ctx),
        Command::Label => commands::label(&ctx),
        Command::Analyze => commands::analyze(&ctx),
        Command::Train => commands::train(&ctx),
        Command::Backtest => commands::backtest(&ctx),
        Command::Report => commands::report(&ctx),
        Command::Frontier => commands::frontier(&ctx),
        Command::Audit => commands::audit(&ctx),
        Command::Synth(_) => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
