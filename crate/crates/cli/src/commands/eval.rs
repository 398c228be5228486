//! Scores candidate summaries against references, joined by id.
//!
//! Per record: sentence BLEU-4 with add-one smoothing, ROUGE-L, METEOR,
//! chrF and c_coeff (against the reference record's code). Corpus level:
//! BLEU-4 from pooled counts without smoothing, every other metric as the
//! mean of its per-record values. An empty candidate scores 0 everywhere.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::value::RawValue;
use sumopt_core::metrics::{
    bleu, c_coeff, chrf, meteor, metric_tokens, rouge_l, BleuStats, Metric, MetricError, Smoothing,
};
use sumopt_core::{lex_code, Language};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::report::{MetricValue, RunReport};
use crate::store::{open, parse_fields, parse_id};

const BLEU_ORDER: usize = 4;

/// One line of a candidate or reference file. Corpus records qualify; only
/// `id` and `summary` are required.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub line: usize,
    pub id: String,
    pub summary: String,
    pub code: Option<String>,
    pub language: Option<Language>,
}

fn decode_row(text: &str, line: usize) -> Result<SummaryRow, String> {
    let fields = parse_fields(text)?;
    let get = |name: &str| fields.0.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_ref());
    let string = |raw: &RawValue, name: &str| {
        serde_json::from_str::<String>(raw.get()).map_err(|e| format!("field `{name}`: {e}"))
    };
    let id = parse_id(get("id").ok_or("missing field `id`")?)?;
    let summary = string(get("summary").ok_or("missing field `summary`")?, "summary")?;
    let code = get("code").map(|v| string(v, "code")).transpose()?;
    let language = match get("language") {
        Some(v) => Some(string(v, "language")?.to_ascii_lowercase().parse::<Language>().map_err(|e| e.to_string())?),
        None => None,
    };
    Ok(SummaryRow { line, id, summary, code, language })
}

/// A malformed line: its number and the reason.
pub type LineFailure = (usize, String);

/// Reads every row; malformed lines come back as `(line, reason)`.
pub fn read_summaries(path: &Path) -> Result<(Vec<SummaryRow>, Vec<LineFailure>), CliError> {
    let reader = open(path)?;
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in reader.split(b'\n').enumerate() {
        let bytes = line.map_err(|e| CliError::io(path, e))?;
        let Ok(text) = std::str::from_utf8(&bytes) else {
            bad.push((i + 1, "invalid UTF-8".to_string()));
            continue;
        };
        if text.trim().is_empty() {
            continue;
        }
        match decode_row(text, i + 1) {
            Ok(r) => rows.push(r),
            Err(reason) => bad.push((i + 1, reason)),
        }
    }
    Ok((rows, bad))
}

struct Scored {
    values: Vec<f64>,
    bleu_stats: BleuStats,
}

fn score(
    cand: &SummaryRow,
    reference: &SummaryRow,
    metrics: &[Metric],
    cfg: &PipelineConfig,
) -> Result<Scored, String> {
    let c = metric_tokens(&cand.summary);
    let r = metric_tokens(&reference.summary);
    if r.is_empty() {
        return Err("reference summary is empty".into());
    }
    let refs = [r.clone()];
    let bleu_stats = if c.is_empty() {
        BleuStats { candidate_len: 0, reference_len: r.len() as u64, ..BleuStats::new(BLEU_ORDER) }
    } else {
        BleuStats::sentence(&c, &refs, BLEU_ORDER).map_err(|e| e.to_string())?
    };
    let mut values = Vec::with_capacity(metrics.len());
    for m in metrics {
        let v: Result<f64, MetricError> = match m {
            _ if c.is_empty() => Ok(0.0),
            Metric::Bleu => bleu(&c, &refs, BLEU_ORDER, Smoothing::AddOne).map(|s| s.value),
            Metric::RougeL => rouge_l(&c, &r).map(|s| s.value),
            Metric::Meteor => meteor(&c, &r).map(|s| s.value),
            Metric::ChrF => chrf(&cand.summary, &reference.summary).map(|s| s.value),
            Metric::CCoeff => {
                let code = reference.code.as_deref().ok_or("c-coeff needs `code` in the reference record")?;
                let lang = reference
                    .language
                    .or(cfg.language)
                    .ok_or("c-coeff needs the reference's language (field or --language)")?;
                c_coeff(&c, lex_code(code, lang).tokens()).map(|s| s.value)
            }
        };
        values.push(v.or_else(|e| match e {
            // no word-like tokens in the candidate: nothing can leak
            MetricError::EmptySummary => Ok(0.0),
            e => Err(e.to_string()),
        })?);
    }
    Ok(Scored { values, bleu_stats })
}

/// Returns true when the table went to stdout.
pub(super) fn run(cfg: &PipelineConfig, report: &mut RunReport) -> Result<bool, CliError> {
    let start = Instant::now();
    let metrics = cfg.metrics_or_all();
    let (cands, bad_c) = read_summaries(cfg.candidates.as_deref().expect("validated"))?;
    let (refs, bad_r) = read_summaries(cfg.references.as_deref().expect("validated"))?;
    for (line, reason) in bad_c {
        report.counts.input += 1;
        report.fail(None, Some(line), format!("candidates: {reason}"));
    }
    if !bad_r.is_empty() {
        report.notes.push(format!("{} malformed reference lines were skipped", bad_r.len()));
    }
    let mut by_id: HashMap<&str, &SummaryRow> = HashMap::with_capacity(refs.len());
    for r in &refs {
        if by_id.insert(&r.id, r).is_some() {
            return Err(CliError::config(format!("reference id {} appears more than once", r.id)));
        }
    }
    let missing: Vec<String> =
        cands.iter().filter(|c| !by_id.contains_key(c.id.as_str())).map(|c| c.id.clone()).collect();
    if !missing.is_empty() {
        return Err(CliError::MissingPair { ids: missing });
    }

    let scored: Vec<Result<Scored, String>> =
        cands.par_iter().map(|c| score(c, by_id[c.id.as_str()], &metrics, cfg)).collect();

    let mut out: Box<dyn Write> = match &cfg.output {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let out_path = cfg.output.as_deref().unwrap_or(Path::new("<stdout>"));
    let mut pooled = BleuStats::new(BLEU_ORDER);
    let mut sums = vec![0.0f64; metrics.len()];
    let mut n = 0u64;
    for (cand, result) in cands.iter().zip(scored) {
        report.counts.input += 1;
        let s = match result {
            Ok(s) => s,
            Err(reason) => {
                log::warn!("record {}: {reason}", cand.id);
                report.fail(Some(&cand.id), Some(cand.line), reason);
                continue;
            }
        };
        report.counts.output += 1;
        n += 1;
        pooled.merge(&s.bleu_stats);
        let mut line = format!("{{\"id\":{}", serde_json::to_string(&cand.id).expect("string"));
        for ((m, v), sum) in metrics.iter().zip(&s.values).zip(&mut sums) {
            *sum += v;
            line.push_str(&format!(",\"{}\":{}", m.as_str(), serde_json::to_string(v).expect("finite")));
        }
        line.push_str("}\n");
        out.write_all(line.as_bytes()).map_err(|e| CliError::io(out_path, e))?;
    }
    out.flush().map_err(|e| CliError::io(out_path, e))?;

    if n > 0 {
        for (m, sum) in metrics.iter().zip(sums) {
            let value = match m {
                Metric::Bleu => pooled.score(Smoothing::None).value,
                _ => sum / n as f64,
            };
            report.scores.push(MetricValue { metric: m.as_str().to_string(), value, records: n });
        }
    }
    report.notes.push("bleu is corpus BLEU-4 over pooled counts; other scores are per-record means".into());
    report.time("eval", start);
    Ok(cfg.output.is_none())
}
