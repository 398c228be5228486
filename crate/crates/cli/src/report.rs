//! The JSON run report.
//!
//! Keys come out in declaration order. Two fields vary between otherwise
//! identical runs and are listed in [`VOLATILE_KEYS`]; everything else is a
//! pure function of the configuration and inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sumopt_core::{CorpusStats, EntropyReport};

use crate::config::PipelineConfig;
use crate::error::CliError;

/// Report keys excluded from reproducibility comparisons.
pub const VOLATILE_KEYS: [&str; 2] = ["timing_ms", "generated_at_unix"];

/// How every input record was accounted for: `input = output + filtered +
/// failed`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RecordCounts {
    pub input: u64,
    pub output: u64,
    pub filtered: u64,
    pub failed: u64,
    /// Records whose reduction deleted every token (kept unless
    /// `drop_empty`, in which case they are counted as filtered).
    pub empty_after_reduction: u64,
}

impl RecordCounts {
    pub fn reconciles(&self) -> bool {
        self.input == self.output + self.filtered + self.failed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureNote {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetentionSummary {
    pub records: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub retention: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BanListSummary {
    pub k: usize,
    pub max_n: usize,
    pub entries: usize,
    pub source_fingerprint: String,
    pub content_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricValue {
    pub metric: String,
    pub value: f64,
    pub records: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub comparison: String,
    pub metric: String,
    pub n_total: usize,
    pub n_pairs: usize,
    pub raw_p: f64,
    pub adjusted_p: f64,
    pub p_display: String,
    pub cliffs_delta: f64,
    pub magnitude: String,
    pub significant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: PipelineConfig,
    pub counts: RecordCounts,
    pub failures: Vec<FailureNote>,
    pub filters: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus_before: Option<CorpusStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus_after: Option<CorpusStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_before: Option<EntropyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_after: Option<EntropyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retention: Option<RetentionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ban_list: Option<BanListSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scores: Vec<MetricValue>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<ComparisonRow>,
    pub notes: Vec<String>,
    pub timing_ms: BTreeMap<String, u64>,
    pub generated_at_unix: u64,
}

impl RunReport {
    pub fn new(command: &'static str, config: PipelineConfig) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            counts: RecordCounts::default(),
            failures: Vec::new(),
            filters: Vec::new(),
            corpus_before: None,
            corpus_after: None,
            entropy_before: None,
            entropy_after: None,
            retention: None,
            ban_list: None,
            scores: Vec::new(),
            comparisons: Vec::new(),
            notes: Vec::new(),
            timing_ms: BTreeMap::new(),
            generated_at_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }

    pub fn fail(&mut self, record_id: Option<&str>, line: Option<usize>, reason: impl Into<String>) {
        self.counts.failed += 1;
        self.failures.push(FailureNote { record_id: record_id.map(str::to_string), line, reason: reason.into() });
    }

    /// Records the wall time since `start` under `stage`.
    pub fn time(&mut self, stage: &str, start: Instant) {
        let ms = u64::try_from(start.elapsed().as_millis()).unwrap_or(u64::MAX);
        *self.timing_ms.entry(stage.to_string()).or_default() += ms;
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }
}

/// The report with [`VOLATILE_KEYS`] removed, for byte comparisons.
pub fn stable_view(report_json: &str) -> Result<String, serde_json::Error> {
    let mut value: serde_json::Value = serde_json::from_str(report_json)?;
    if let Some(obj) = value.as_object_mut() {
        for k in VOLATILE_KEYS {
            obj.remove(k);
        }
    }
    serde_json::to_string(&value)
}
