//! Token distribution, entropy and (against a baseline) entropy reduction
//! and pooled retention.
//!
//! Inputs are either corpora or token distributions saved by an earlier
//! `stats --output`. A corpus record contributes the tokens of its
//! `reduced_code` when present, otherwise of its `code`.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufRead;
use std::path::Path;
use std::time::Instant;

use sumopt_core::{lex_code, CorpusRecord, CorpusStats, TokenDistribution};

use super::{drive, entropy_of, record_store_error};
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::report::{RetentionSummary, RunReport};
use crate::store::{open, parse_fields, read_corpus_with, StoreError};

fn representation(record: &CorpusRecord) -> Vec<String> {
    let text = record.reduced_code.as_deref().unwrap_or(&record.code);
    lex_code(text, record.language).into_tokens()
}

/// A saved distribution is a JSON object of token counts; a corpus has one
/// record object per line.
fn is_distribution_file(path: &Path) -> Result<bool, CliError> {
    let mut first = String::new();
    let mut reader = open(path)?;
    loop {
        first.clear();
        if reader.read_line(&mut first).map_err(|e| CliError::io(path, e))? == 0 {
            return Ok(false);
        }
        if !first.trim().is_empty() {
            break;
        }
    }
    Ok(match parse_fields(&first) {
        Ok(fields) => !fields.0.iter().any(|(k, _)| k == "code"),
        Err(_) => true,
    })
}

pub fn load_distribution(path: &Path) -> Result<TokenDistribution, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let counts: BTreeMap<String, u64> = serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!("{} is neither a corpus nor a token distribution: {e}", path.display()))
    })?;
    Ok(TokenDistribution::from_counts(counts))
}

pub fn save_distribution(dist: &TokenDistribution, path: &Path) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(dist.counts()).expect("counts serialize");
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

struct Measured {
    dist: TokenDistribution,
    stats: Option<CorpusStats>,
    records: u64,
    skipped: Vec<StoreError>,
}

fn measure(path: &Path, cfg: &PipelineConfig) -> Result<Measured, CliError> {
    if is_distribution_file(path)? {
        return Ok(Measured { dist: load_distribution(path)?, stats: None, records: 0, skipped: Vec::new() });
    }
    let mut m = Measured {
        dist: TokenDistribution::new(),
        stats: Some(CorpusStats::default()),
        records: 0,
        skipped: Vec::new(),
    };
    drive(
        read_corpus_with(path, cfg.language)?,
        |r| {
            let mut s = CorpusStats::default();
            s.observe(&r);
            (s, representation(&r))
        },
        |item| {
            match item {
                Ok((s, tokens)) => {
                    m.records += 1;
                    m.stats.as_mut().expect("corpus").merge(&s);
                    m.dist.observe(tokens.iter().map(String::as_str));
                }
                Err(e) => m.skipped.push(e),
            }
            Ok(())
        },
    )?;
    Ok(m)
}

pub(super) fn run(cfg: &PipelineConfig, report: &mut RunReport) -> Result<(), CliError> {
    let start = Instant::now();
    let input = measure(cfg.input.as_deref().expect("validated"), cfg)?;
    report.counts.input += input.records;
    report.counts.output += input.records;
    for e in &input.skipped {
        record_store_error(report, e);
    }
    report.corpus_after = input.stats;
    let current = entropy_of(&input.dist);
    if current.is_none() {
        report.notes.push("input has no tokens; entropy is undefined".into());
    }
    if let Some(base_path) = &cfg.baseline {
        let base = measure(base_path, cfg)?;
        if !base.skipped.is_empty() {
            report.notes.push(format!("{} malformed baseline lines were skipped", base.skipped.len()));
        }
        report.corpus_before = base.stats;
        report.entropy_before = entropy_of(&base.dist);
        if base.dist.total() > 0 {
            report.retention = Some(RetentionSummary {
                records: input.records,
                input_tokens: base.dist.total(),
                output_tokens: input.dist.total(),
                retention: input.dist.total() as f64 / base.dist.total() as f64,
            });
        }
    }
    report.entropy_after = match (current, &report.entropy_before) {
        (Some(now), Some(base)) => now.against(base).ok().or(Some(now)),
        (now, _) => now,
    };
    if let Some(out) = &cfg.output {
        save_distribution(&input.dist, out)?;
    }
    report.time("stats", start);
    Ok(())
}
