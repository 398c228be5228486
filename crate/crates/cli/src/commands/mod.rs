//! One module per subcommand, plus the chunked parallel driver they share.

mod compare;
mod eval;
mod filter;
mod reduce;
mod stats;

use rayon::prelude::*;
use sumopt_core::filter::{benchmark_view, passes_side};
use sumopt_core::{shannon_entropy, CorpusRecord, EntropyReport, FilterConfig, TokenDistribution};

use crate::config::{CommandKind, PipelineConfig};
use crate::error::CliError;
use crate::report::RunReport;
use crate::store::StoreError;

pub use eval::{read_summaries, SummaryRow};
pub use reduce::mine_ban_list;

/// Records held in memory at once by the streaming stages.
pub const CHUNK_SIZE: usize = 2048;

/// What a command produced besides its report.
pub struct CommandOutput {
    pub report: RunReport,
    /// True when the primary output was printed to stdout.
    pub wrote_stdout: bool,
}

pub fn run(kind: CommandKind, cfg: &PipelineConfig) -> Result<CommandOutput, CliError> {
    let mut report = RunReport::new(kind.as_str(), cfg.clone());
    let wrote_stdout = match kind {
        CommandKind::Reduce => reduce::run(cfg, &mut report).map(|_| false)?,
        CommandKind::MineNgrams => reduce::run_mine(cfg, &mut report).map(|_| false)?,
        CommandKind::Filter => filter::run(cfg, &mut report).map(|_| false)?,
        CommandKind::Stats => stats::run(cfg, &mut report).map(|_| false)?,
        CommandKind::Eval => eval::run(cfg, &mut report)?,
        CommandKind::Compare => compare::run(cfg, &mut report)?,
    };
    debug_assert!(report.counts.reconciles(), "{:?}", report.counts);
    Ok(CommandOutput { report, wrote_stdout })
}

/// Maps every record of `records` with `f` on the worker pool, `CHUNK_SIZE`
/// records at a time, and feeds the results to `sink` in input order.
///
/// Per-line read errors reach `sink` as `Err`; any other read error stops
/// the run.
pub(crate) fn drive<I, T, F, S>(records: I, f: F, mut sink: S) -> Result<(), CliError>
where
    I: Iterator<Item = Result<CorpusRecord, StoreError>>,
    T: Send,
    F: Fn(CorpusRecord) -> T + Sync,
    S: FnMut(Result<T, StoreError>) -> Result<(), CliError>,
{
    let mut chunk: Vec<Result<CorpusRecord, StoreError>> = Vec::with_capacity(CHUNK_SIZE);
    let mut flush = |chunk: &mut Vec<Result<CorpusRecord, StoreError>>| -> Result<(), CliError> {
        let mapped: Vec<Result<T, StoreError>> = chunk.par_drain(..).map(|r| r.map(&f)).collect();
        mapped.into_iter().try_for_each(&mut sink)
    };
    for item in records {
        let item = match item {
            Err(e) if !e.is_per_line() => return Err(e.into()),
            other => other,
        };
        chunk.push(item);
        if chunk.len() == CHUNK_SIZE {
            flush(&mut chunk)?;
        }
    }
    flush(&mut chunk)
}

/// Result of passing one record through the configured row filters.
pub(crate) enum Verdict {
    Keep(CorpusRecord),
    Drop,
    Fail(String),
}

/// Side-score threshold first, then benchmark bounds (which may also
/// replace the summary by its first sentence).
pub(crate) fn apply_filters(record: CorpusRecord, cfg: &PipelineConfig, fcfg: &FilterConfig) -> Verdict {
    if let Some(tau) = cfg.side_threshold {
        match passes_side(&record, tau) {
            Ok(true) => {}
            Ok(false) => return Verdict::Drop,
            Err(e) => return Verdict::Fail(e.to_string()),
        }
    }
    if cfg.benchmark_filter {
        return match benchmark_view(&record, fcfg) {
            Some(view) => Verdict::Keep(view),
            None => Verdict::Drop,
        };
    }
    Verdict::Keep(record)
}

/// Human-readable list of the filters `cfg` enables.
pub(crate) fn describe_filters(cfg: &PipelineConfig) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(tau) = cfg.side_threshold {
        out.push(format!("side_score >= {tau}"));
    }
    if cfg.benchmark_filter {
        out.push(format!(
            "code tokens in {}..={}, summary tokens > {}{}",
            cfg.min_code_tokens,
            cfg.max_code_tokens,
            cfg.min_summary_tokens,
            if cfg.first_sentence { ", first sentence only" } else { "" }
        ));
    }
    out
}

pub(crate) fn entropy_of(dist: &TokenDistribution) -> Option<EntropyReport> {
    shannon_entropy(dist).ok()
}

pub(crate) fn record_store_error(report: &mut RunReport, e: &StoreError) {
    log::warn!("{e}");
    report.counts.input += 1;
    report.fail(None, e.line(), e.to_string());
}
