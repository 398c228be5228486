use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use sumopt_core::reduce::{reduce, CorpusFingerprint, NgramCounts};
use sumopt_core::{lex_code, CorpusStats, NgramBanList, ReduceError, Strategy, TokenDistribution};

use super::{apply_filters, describe_filters, drive, entropy_of, record_store_error, Verdict};
use crate::banlist_io;
use crate::config::{PipelineConfig, StrategyChoice};
use crate::error::CliError;
use crate::report::{BanListSummary, RetentionSummary, RunReport};
use crate::store::{read_corpus_with, CorpusWriter};

enum Reduced {
    Kept { record: sumopt_core::CorpusRecord, before: Vec<String>, after: Vec<String>, empty: bool },
    Filtered,
    DroppedEmpty,
    Failed { id: String, reason: String },
}

/// Mines a ban list from the corpus at `path`. Malformed lines are recorded
/// as failures in `report`.
pub fn mine_ban_list(path: &Path, cfg: &PipelineConfig, report: &mut RunReport) -> Result<NgramBanList, CliError> {
    let start = Instant::now();
    let max_n = cfg.max_n;
    let mut counts = NgramCounts::new(max_n);
    let mut fingerprint = CorpusFingerprint::new();
    let mut batch: Vec<sumopt_core::CorpusRecord> = Vec::new();
    let absorb = |batch: &mut Vec<sumopt_core::CorpusRecord>, counts: &mut NgramCounts| {
        let shard = batch
            .par_iter()
            .fold(
                || NgramCounts::new(max_n),
                |mut c, r| {
                    c.observe(lex_code(&r.code, r.language).tokens());
                    c
                },
            )
            .reduce(
                || NgramCounts::new(max_n),
                |mut a, b| {
                    a.merge(b);
                    a
                },
            );
        counts.merge(shard);
        batch.clear();
    };
    for item in read_corpus_with(path, cfg.language)? {
        match item {
            Ok(r) => {
                fingerprint.observe(&r);
                batch.push(r);
                if batch.len() == super::CHUNK_SIZE {
                    absorb(&mut batch, &mut counts);
                }
            }
            Err(e) if e.is_per_line() => {
                log::warn!("{}: {e}", path.display());
                report.notes.push(format!("skipped while mining {}: {e}", path.display()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    absorb(&mut batch, &mut counts);
    if fingerprint.records() == 0 {
        return Err(CliError::config(format!("{} has no records to mine n-grams from", path.display())));
    }
    let ban = counts.top_k(cfg.k, fingerprint.finish()).map_err(|e| CliError::config(e.to_string()))?;
    report.ban_list = Some(summarize(&ban));
    report.time("mine", start);
    Ok(ban)
}

fn summarize(ban: &NgramBanList) -> BanListSummary {
    BanListSummary {
        k: ban.k(),
        max_n: ban.max_n(),
        entries: ban.len(),
        source_fingerprint: ban.source_fingerprint().to_string(),
        content_fingerprint: banlist_io::content_fingerprint(ban),
    }
}

pub(super) fn run_mine(cfg: &PipelineConfig, report: &mut RunReport) -> Result<(), CliError> {
    let input = cfg.input.as_deref().or(cfg.train.as_deref()).expect("validated");
    let ban = mine_ban_list(input, cfg, report)?;
    banlist_io::save(&ban, cfg.output.as_deref().expect("validated"))?;
    Ok(())
}

pub(super) fn run(cfg: &PipelineConfig, report: &mut RunReport) -> Result<(), CliError> {
    let strategy = cfg.strategy.strategy();
    let ban = match (cfg.strategy, &cfg.ban_list, &cfg.train) {
        (StrategyChoice::Crystalbleu, Some(path), _) => {
            let ban = banlist_io::load(path)?;
            report.ban_list = Some(summarize(&ban));
            Some(ban)
        }
        (StrategyChoice::Crystalbleu, None, Some(train)) => Some(mine_ban_list(train, cfg, report)?),
        _ => None,
    };
    let fcfg = cfg.filter_config();
    report.filters = describe_filters(cfg);

    let start = Instant::now();
    let mut writer = CorpusWriter::create(cfg.output.as_deref().expect("validated"))?;
    let mut before_stats = CorpusStats::default();
    let mut before = TokenDistribution::new();
    let mut after = TokenDistribution::new();
    let mut retention = sumopt_core::info::RetentionTally::default();

    let process = |record: sumopt_core::CorpusRecord| -> (CorpusStats, Reduced) {
        let mut stats = CorpusStats::default();
        stats.observe(&record);
        let id = record.id.clone();
        let record = match apply_filters(record, cfg, &fcfg) {
            Verdict::Keep(r) => r,
            Verdict::Drop => return (stats, Reduced::Filtered),
            Verdict::Fail(reason) => return (stats, Reduced::Failed { id, reason }),
        };
        let input = lex_code(&record.code, record.language).into_tokens();
        let outcome = match reduce(&record, strategy, ban.as_ref()) {
            Ok(o) => o,
            Err(ReduceError::EmptyAfterReduction(o)) => {
                if cfg.drop_empty {
                    return (stats, Reduced::DroppedEmpty);
                }
                let out = o.apply_to(&record);
                return (stats, Reduced::Kept { record: out, before: input, after: Vec::new(), empty: true });
            }
            Err(e) => return (stats, Reduced::Failed { id: record.id.clone(), reason: e.to_string() }),
        };
        if outcome.exceeds_input() {
            log::debug!(
                "record {}: {} tokens became {}",
                record.id,
                outcome.input_token_count,
                outcome.output_token_count
            );
        }
        let out = if strategy == Strategy::Original { record } else { outcome.apply_to(&record) };
        let after = outcome.reduced_tokens.into_tokens();
        (stats, Reduced::Kept { record: out, before: input, after, empty: false })
    };

    drive(read_corpus_with(cfg.input.as_deref().expect("validated"), cfg.language)?, process, |item| {
        let (stats, result) = match item {
            Ok(v) => v,
            Err(e) => {
                record_store_error(report, &e);
                return Ok(());
            }
        };
        report.counts.input += 1;
        before_stats.merge(&stats);
        match result {
            Reduced::Kept { record, before: b, after: a, empty } => {
                writer.write(&record)?;
                report.counts.output += 1;
                if empty {
                    report.counts.empty_after_reduction += 1;
                }
                retention.observe_counts(b.len() as u64, a.len() as u64);
                before.observe(b.iter().map(String::as_str));
                after.observe(a.iter().map(String::as_str));
            }
            Reduced::Filtered => report.counts.filtered += 1,
            Reduced::DroppedEmpty => {
                report.counts.filtered += 1;
                report.counts.empty_after_reduction += 1;
            }
            Reduced::Failed { id, reason } => {
                log::warn!("record {id}: {reason}");
                report.fail(Some(&id), None, reason);
            }
        }
        Ok(())
    })?;
    // the written corpus measured in its new representation
    let written = writer.finish()?;
    report.corpus_after = Some(CorpusStats { total_code_tokens: retention.output_tokens, ..written });
    report.corpus_before = Some(before_stats);
    report.entropy_before = entropy_of(&before);
    report.entropy_after = match (entropy_of(&after), &report.entropy_before) {
        (Some(a), Some(b)) => a.against(b).ok().or(Some(a)),
        (a, _) => a,
    };
    if let Ok(r) = retention.retention() {
        report.retention = Some(RetentionSummary {
            records: retention.records,
            input_tokens: retention.input_tokens,
            output_tokens: retention.output_tokens,
            retention: r,
        });
    }
    if report.counts.empty_after_reduction > 0 {
        report.notes.push(format!(
            "{} records lost every token to the ban list and were {}",
            report.counts.empty_after_reduction,
            if cfg.drop_empty { "dropped" } else { "kept with empty reduced_code" }
        ));
    }
    report.time("reduce", start);
    Ok(())
}
