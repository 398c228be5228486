//! Reference-based summary-quality metrics.
//!
//! Word-level metrics lowercase both sides; chrF works on the raw text.

mod bleu;
mod chrf;
mod edit;
mod meteor;
mod rouge;
mod stem;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::lexer::lex_summary;

pub use bleu::{bleu, corpus_bleu, BleuStats, Smoothing};
pub use chrf::{chrf, chrf_with};
pub use edit::{c_coeff, code_words, levenshtein};
pub use meteor::meteor;
pub use rouge::{lcs_len, rouge_l};
pub use stem::porter_stem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Metric {
    #[cfg_attr(feature = "serde", serde(rename = "bleu"))]
    Bleu,
    #[cfg_attr(feature = "serde", serde(rename = "rouge-l"))]
    RougeL,
    #[cfg_attr(feature = "serde", serde(rename = "meteor"))]
    Meteor,
    #[cfg_attr(feature = "serde", serde(rename = "chrf"))]
    ChrF,
    #[cfg_attr(feature = "serde", serde(rename = "c-coeff"))]
    CCoeff,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Bleu, Metric::RougeL, Metric::Meteor, Metric::ChrF, Metric::CCoeff];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Bleu => "bleu",
            Metric::RougeL => "rouge-l",
            Metric::Meteor => "meteor",
            Metric::ChrF => "chrf",
            Metric::CCoeff => "c-coeff",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| MetricError::UnknownMetric(String::from(s)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("candidate is empty")]
    EmptyCandidate,
    #[error("no references given")]
    EmptyReferences,
    #[error("input is empty")]
    EmptyInput,
    #[error("summary has no words")]
    EmptySummary,
    #[error("paired samples differ in length: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
}

/// A metric value in `[0, 1]` with its named intermediate quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricScore {
    pub metric: Metric,
    pub value: f64,
    pub components: Vec<(&'static str, f64)>,
}

impl MetricScore {
    pub(crate) fn new(metric: Metric, value: f64) -> Self {
        MetricScore { metric, value, components: Vec::new() }
    }

    pub(crate) fn with(mut self, name: &'static str, value: f64) -> Self {
        self.components.push((name, value));
        self
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }
}

/// Per-record scores of two systems on one metric, paired by position.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedMetricSamples {
    pub metric: Metric,
    pub system_a: Vec<f64>,
    pub system_b: Vec<f64>,
}

impl PairedMetricSamples {
    pub fn new(metric: Metric, system_a: Vec<f64>, system_b: Vec<f64>) -> Result<Self, MetricError> {
        if system_a.len() != system_b.len() {
            return Err(MetricError::LengthMismatch { a: system_a.len(), b: system_b.len() });
        }
        Ok(PairedMetricSamples { metric, system_a, system_b })
    }

    pub fn len(&self) -> usize {
        self.system_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.system_a.is_empty()
    }
}

/// Lowercased summary tokens, the unit word-level metrics compare.
pub fn metric_tokens(text: &str) -> Vec<String> {
    lex_summary(text).into_tokens().into_iter().map(|t| t.to_lowercase()).collect()
}

pub(crate) fn lowercase_all<T: AsRef<str>>(tokens: &[T]) -> Vec<String> {
    tokens.iter().map(|t| t.as_ref().to_lowercase()).collect()
}
