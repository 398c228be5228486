//! The ⟨code, summary⟩ record model shared by every stage of the pipeline.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Source language of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Language {
    Java,
    Python,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::Python => "python",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = RecordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "java" => Ok(Language::Java),
            "python" => Ok(Language::Python),
            other => Err(RecordError::InvalidFieldValue {
                field: "language",
                reason: alloc::format!("unknown language {other:?}"),
            }),
        }
    }
}

/// Which representation a record's `reduced_code` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Strategy {
    Original,
    Ast,
    Signature,
    #[cfg_attr(feature = "serde", serde(rename = "crystalbleu"))]
    CrystalBleu,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Original => "original",
            Strategy::Ast => "ast",
            Strategy::Signature => "signature",
            Strategy::CrystalBleu => "crystalbleu",
        }
    }

    /// Strategies that only ever delete tokens from the lexical stream.
    pub fn is_pure_deletion(self) -> bool {
        matches!(self, Strategy::Signature | Strategy::CrystalBleu | Strategy::Original)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = RecordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(Strategy::Original),
            "ast" => Ok(Strategy::Ast),
            "signature" => Ok(Strategy::Signature),
            "crystalbleu" => Ok(Strategy::CrystalBleu),
            other => Err(RecordError::InvalidFieldValue {
                field: "strategy",
                reason: alloc::format!("unknown strategy {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordError {
    #[error("invalid value for field `{field}`: {reason}")]
    InvalidFieldValue { field: &'static str, reason: String },
}

/// One ⟨code, summary⟩ instance.
///
/// `extra` carries fields this crate does not know about, as `(name, raw
/// encoded value)` pairs, so that readers can re-emit them untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecord {
    pub id: String,
    pub language: Language,
    pub code: String,
    pub summary: String,
    pub side_score: Option<f64>,
    pub reduced_code: Option<String>,
    pub strategy: Option<Strategy>,
    pub extra: Vec<(String, String)>,
}

impl CorpusRecord {
    pub fn new(id: impl Into<String>, language: Language, code: impl Into<String>, summary: impl Into<String>) -> Self {
        CorpusRecord {
            id: id.into(),
            language,
            code: code.into(),
            summary: summary.into(),
            side_score: None,
            reduced_code: None,
            strategy: None,
            extra: Vec::new(),
        }
    }

    pub fn with_side_score(mut self, score: f64) -> Self {
        self.side_score = Some(score);
        self
    }

    pub fn with_reduction(mut self, strategy: Strategy, reduced_code: impl Into<String>) -> Self {
        self.strategy = Some(strategy);
        self.reduced_code = Some(reduced_code.into());
        self
    }

    /// Checks the record invariants.
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.code.trim().is_empty() {
            return Err(RecordError::InvalidFieldValue {
                field: "code",
                reason: "code is empty after trimming whitespace".into(),
            });
        }
        if let Some(s) = self.side_score {
            if !(0.0..=1.0).contains(&s) {
                return Err(RecordError::InvalidFieldValue {
                    field: "side_score",
                    reason: alloc::format!("{s} is outside [0, 1]"),
                });
            }
        }
        match (&self.strategy, &self.reduced_code) {
            (Some(_), Some(_)) | (None, None) => Ok(()),
            (Some(_), None) => Err(RecordError::InvalidFieldValue {
                field: "reduced_code",
                reason: "strategy is set but reduced_code is missing".into(),
            }),
            (None, Some(_)) => Err(RecordError::InvalidFieldValue {
                field: "strategy",
                reason: "reduced_code is set but strategy is missing".into(),
            }),
        }
    }
}

/// Token and record counts over a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CorpusStats {
    pub record_count: u64,
    pub total_code_tokens: u64,
    pub total_summary_tokens: u64,
}

impl CorpusStats {
    /// Adds one record, counting lexical code tokens and summary tokens.
    pub fn observe(&mut self, record: &CorpusRecord) {
        self.record_count += 1;
        self.total_code_tokens += crate::lexer::lex_code(&record.code, record.language).len() as u64;
        self.total_summary_tokens += crate::lexer::lex_summary(&record.summary).len() as u64;
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        self.record_count += other.record_count;
        self.total_code_tokens += other.total_code_tokens;
        self.total_summary_tokens += other.total_summary_tokens;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_only_code_is_rejected() {
        let r = CorpusRecord::new("1", Language::Java, "  \n\t", "x");
        assert!(r.validate().is_err());
    }

    #[test]
    fn side_score_bounds() {
        let base = CorpusRecord::new("1", Language::Python, "x = 1", "s");
        assert!(base.clone().with_side_score(0.0).validate().is_ok());
        assert!(base.clone().with_side_score(1.0).validate().is_ok());
        assert!(base.clone().with_side_score(1.0001).validate().is_err());
        assert!(base.with_side_score(-0.1).validate().is_err());
    }

    #[test]
    fn strategy_iff_reduced_code() {
        let mut r = CorpusRecord::new("1", Language::Java, "int x;", "s");
        r.strategy = Some(Strategy::Ast);
        assert!(r.validate().is_err());
        r.reduced_code = Some("FieldDeclaration".into());
        assert!(r.validate().is_ok());
        r.strategy = None;
        assert!(r.validate().is_err());
    }

    #[test]
    fn enum_names_round_trip() {
        for s in [Strategy::Original, Strategy::Ast, Strategy::Signature, Strategy::CrystalBleu] {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        for l in [Language::Java, Language::Python] {
            assert_eq!(l.as_str().parse::<Language>().unwrap(), l);
        }
        assert!("Java".parse::<Language>().is_err());
    }

    #[test]
    fn empty_stats_are_zero() {
        let s = CorpusStats::default();
        assert_eq!(s.record_count, 0);
        assert_eq!(s.total_code_tokens, 0);
        assert_eq!(s.total_summary_tokens, 0);
    }
}
