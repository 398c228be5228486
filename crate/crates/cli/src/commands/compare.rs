//! Paired comparison of two systems' per-record scores.
//!
//! Score files are JSON lines with an `id` and numeric columns, as written
//! by `eval`. A column is named after a metric, optionally prefixed with a
//! group label (`funcom/bleu`); every selected column is one member of the
//! test family that Holm's correction runs over.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use sumopt_core::metrics::{Metric, PairedMetricSamples};
use sumopt_core::stats::{compare_systems, render_p, CompareConfig, Comparison, WilcoxonMode};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::report::{ComparisonRow, RunReport};
use crate::store::{open, parse_fields, parse_id};

struct ScoreTable {
    columns: Vec<String>,
    rows: Vec<(String, HashMap<String, f64>)>,
}

fn read_scores(path: &Path) -> Result<ScoreTable, CliError> {
    use std::io::BufRead;
    let bad = |line: usize, reason: String| CliError::config(format!("{}:{line}: {reason}", path.display()));
    let mut columns: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let text = line.map_err(|e| CliError::io(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        let fields = parse_fields(&text).map_err(|e| bad(i + 1, e))?;
        let mut id = None;
        let mut values = HashMap::new();
        for (k, raw) in fields.0 {
            if k == "id" {
                id = Some(parse_id(&raw).map_err(|e| bad(i + 1, e))?);
                continue;
            }
            let v: f64 = serde_json::from_str(raw.get()).map_err(|_| bad(i + 1, format!("`{k}` is not a number")))?;
            if rows.is_empty() {
                columns.push(k.clone());
            }
            values.insert(k, v);
        }
        let id = id.ok_or_else(|| bad(i + 1, "missing field `id`".into()))?;
        if !seen.insert(id.clone()) {
            return Err(bad(i + 1, format!("id {id} appears more than once")));
        }
        rows.push((id, values));
    }
    Ok(ScoreTable { columns, rows })
}

fn column_metric(column: &str) -> Option<Metric> {
    column.rsplit('/').next().and_then(|m| m.parse().ok())
}

fn column_values(table: &ScoreTable, order: &[&str], column: &str, path: &Path) -> Result<Vec<f64>, CliError> {
    let index: HashMap<&str, &HashMap<String, f64>> = table.rows.iter().map(|(id, v)| (id.as_str(), v)).collect();
    order
        .iter()
        .map(|id| {
            index[id]
                .get(column)
                .copied()
                .ok_or_else(|| CliError::config(format!("{}: record {id} has no `{column}`", path.display())))
        })
        .collect()
}

pub(super) fn run(cfg: &PipelineConfig, report: &mut RunReport) -> Result<bool, CliError> {
    let start = Instant::now();
    let path_a = cfg.scores_a.as_deref().expect("validated");
    let path_b = cfg.scores_b.as_deref().expect("validated");
    let a = read_scores(path_a)?;
    let b = read_scores(path_b)?;

    let ids_a: BTreeSet<&str> = a.rows.iter().map(|(id, _)| id.as_str()).collect();
    let ids_b: BTreeSet<&str> = b.rows.iter().map(|(id, _)| id.as_str()).collect();
    let missing: Vec<String> = ids_a.symmetric_difference(&ids_b).map(|s| s.to_string()).collect();
    if !missing.is_empty() {
        return Err(CliError::MissingPair { ids: missing });
    }
    let order: Vec<&str> = a.rows.iter().map(|(id, _)| id.as_str()).collect();

    let mut family = Vec::new();
    for column in &a.columns {
        let Some(metric) = column_metric(column) else {
            report.notes.push(format!("column `{column}` is not a metric and was ignored"));
            continue;
        };
        if cfg.metrics.as_ref().is_some_and(|wanted| !wanted.contains(&metric)) {
            continue;
        }
        let samples = PairedMetricSamples::new(
            metric,
            column_values(&a, &order, column, path_a)?,
            column_values(&b, &order, column, path_b)?,
        )
        .map_err(|e| CliError::config(e.to_string()))?;
        family.push(Comparison { id: column.clone(), samples });
    }
    if family.is_empty() {
        return Err(CliError::config("no metric columns to compare"));
    }
    report.counts.input = order.len() as u64;
    report.counts.output = order.len() as u64;

    let ccfg = CompareConfig { alpha: cfg.alpha, correction: cfg.correction.into(), mode: WilcoxonMode::ExactSmallN };
    let results = compare_systems(&family, &ccfg).map_err(|e| CliError::config(e.to_string()))?;
    let mut table = String::from("comparison\tmetric\tn\traw_p\tadjusted_p\tp\tdelta\tmagnitude\n");
    for r in results {
        let row = ComparisonRow {
            comparison: r.comparison_id,
            metric: r.metric.as_str().to_string(),
            n_total: r.n_total,
            n_pairs: r.n_pairs,
            raw_p: r.raw_p,
            adjusted_p: r.adjusted_p,
            p_display: render_p(r.adjusted_p, cfg.alpha),
            cliffs_delta: r.effect.delta,
            magnitude: r.effect.magnitude.code().to_string(),
            significant: r.significant,
        };
        table.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{:.3}\t{}\n",
            row.comparison,
            row.metric,
            row.n_total,
            row.raw_p,
            row.adjusted_p,
            row.p_display,
            row.cliffs_delta,
            row.magnitude
        ));
        report.comparisons.push(row);
    }
    match &cfg.output {
        Some(p) => fs::write(p, &table).map_err(|e| CliError::io(p, e))?,
        None => io::stdout().lock().write_all(table.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?,
    }
    report.time("compare", start);
    Ok(cfg.output.is_none())
}
