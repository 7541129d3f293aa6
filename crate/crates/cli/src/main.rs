//! `refeval`: score MT systems against several reference sets and compare
//! how well each set tracks human judgments.

mod commands;
mod config;
mod output;
mod workspace;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{resolve, CommonArgs, MetricArgs};
use refeval::tokenize::Casing;

#[derive(Parser)]
#[command(
    name = "refeval",
    version,
    about = "Reference-aware MT meta-evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every system against every reference set.
    Score {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Correlate metric scores with human system scores.
    Correlate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        metric: MetricArgs,
        /// Also write top-k tau curves down to this many systems.
        #[arg(long)]
        topk: Option<usize>,
    },
    /// Build a reference set from the best-rated member per segment.
    ComposeHq {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        compose: ComposeArgs,
    },
    /// List the n-grams of a system output that match a reference.
    NgramReport {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Mean absolute index distance of word alignment links.
    Monotonicity {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check that all inputs line up, without computing anything.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct ComposeArgs {
    /// Member reference sets, comma-separated, in tie-breaking order.
    /// Defaults to every loaded reference set.
    #[arg(long)]
    members: Vec<String>,
    /// Name of the composed set (default `HQ(<members>)`).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// System to report on.
    #[arg(long)]
    system: Option<String>,
    /// Reference set to match against.
    #[arg(long)]
    reference: Option<String>,
    /// N-gram order.
    #[arg(long)]
    order: Option<usize>,
    /// Number of rows to keep.
    #[arg(long)]
    top: Option<usize>,
    /// Lowercase before matching.
    #[arg(long)]
    lowercase: bool,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Score { common, metric } => {
            commands::score(&resolve("score", common, Some(metric))?)?;
        }
        Command::Correlate {
            common,
            metric,
            topk,
        } => {
            let mut cfg = resolve("correlate", common, Some(metric))?;
            cfg.topk = topk.or(cfg.topk);
            commands::correlate(&cfg)?;
        }
        Command::ComposeHq { common, compose } => {
            let mut cfg = resolve("compose-hq", common, None)?;
            if !compose.members.is_empty() {
                cfg.members = compose.members;
            }
            cfg.name = compose.name.or(cfg.name);
            commands::compose(&cfg)?;
        }
        Command::NgramReport { common, report } => {
            let mut cfg = resolve("ngram-report", common, None)?;
            cfg.system = report.system.or(cfg.system);
            cfg.reference = report.reference.or(cfg.reference);
            cfg.order = report.order.unwrap_or(cfg.order);
            cfg.top = report.top.unwrap_or(cfg.top);
            if report.lowercase {
                cfg.params.casing = Casing::Lower;
            }
            commands::ngram_report(&cfg)?;
        }
        Command::Monotonicity { common } => {
            commands::monotonicity_cmd(&resolve("monotonicity", common, None)?)?;
        }
        Command::Validate { common } => {
            return commands::validate(&resolve("validate", common, None)?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
