//! Corpus IO and the `sumopt` command-line pipeline.
//!
//! Each pipeline stage is a subcommand (`reduce`, `filter`, `stats`, `eval`,
//! `compare`, `mine-ngrams`) so that standalone and cascaded runs compose in
//! the shell. Every run writes a JSON report whose `config` member is enough
//! to repeat it.

pub mod banlist_io;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod store;

use std::io::Write;

use clap::{Parser, Subcommand};

pub use crate::config::{CommandKind, Opts, PipelineConfig};
pub use crate::error::CliError;
pub use crate::report::RunReport;
pub use crate::store::{read_corpus, write_corpus, CorpusReader, CorpusWriter, StoreError};

#[derive(Debug, Parser)]
#[command(name = "sumopt", version, about = "Optimize and evaluate code summarization corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replace code by a reduced representation (optionally after filtering).
    Reduce(Opts),
    /// Keep records passing the side-score threshold and/or benchmark bounds.
    Filter(Opts),
    /// Token entropy of a corpus, optionally against a baseline.
    Stats(Opts),
    /// Score candidate summaries against references.
    Eval(Opts),
    /// Paired significance tests between two systems' scores.
    Compare(Opts),
    /// Mine the most frequent n-grams of a training split into a ban list.
    MineNgrams(Opts),
}

impl Command {
    pub fn parts(&self) -> (CommandKind, &Opts) {
        match self {
            Command::Reduce(o) => (CommandKind::Reduce, o),
            Command::Filter(o) => (CommandKind::Filter, o),
            Command::Stats(o) => (CommandKind::Stats, o),
            Command::Eval(o) => (CommandKind::Eval, o),
            Command::Compare(o) => (CommandKind::Compare, o),
            Command::MineNgrams(o) => (CommandKind::MineNgrams, o),
        }
    }
}

/// Runs one command: resolves and checks the configuration, does the work
/// on a pool of `--threads` workers, and writes the report.
///
/// A run whose failures exceed `--max-failures` still writes its outputs and
/// report, then returns [`CliError::PartialFailure`].
pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let (kind, opts) = cli.command.parts();
    let cfg = opts.resolve()?;
    cfg.validate(kind)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let out = pool.install(|| commands::run(kind, &cfg))?;
    let report = out.report;
    match &cfg.report {
        Some(path) => report.write(path)?,
        None if !out.wrote_stdout => {
            std::io::stdout().lock().write_all(report.to_json().as_bytes()).map_err(|e| CliError::io("<stdout>", e))?
        }
        None => {}
    }
    log::info!(
        "{}: {} in, {} out, {} filtered, {} failed",
        kind.as_str(),
        report.counts.input,
        report.counts.output,
        report.counts.filtered,
        report.counts.failed
    );
    if let Some(limit) = cfg.max_failures {
        if report.counts.failed > limit {
            return Err(CliError::PartialFailure { failed: report.counts.failed, limit });
        }
    }
    Ok(report)
}
