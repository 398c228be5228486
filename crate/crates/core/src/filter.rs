//! Row filters: alignment-score thresholding and benchmark curation bounds.

use alloc::string::{String, ToString};

use crate::lexer::{first_sentence, lex_code, lex_summary};
use crate::record::CorpusRecord;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("record {record_id} has no side_score")]
    MissingScore { record_id: String },
    #[error("side threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("min_code_tokens {min} exceeds max_code_tokens {max}")]
    InvalidBounds { min: usize, max: usize },
}

/// Thresholds for both filters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterConfig {
    pub side_threshold: f64,
    pub min_code_tokens: usize,
    pub max_code_tokens: usize,
    /// Summaries must have strictly more tokens than this.
    pub min_summary_tokens: usize,
    pub apply_first_sentence: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            side_threshold: 0.9,
            min_code_tokens: 20,
            max_code_tokens: 200,
            min_summary_tokens: 3,
            apply_first_sentence: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        check_threshold(self.side_threshold)?;
        if self.min_code_tokens > self.max_code_tokens {
            return Err(FilterError::InvalidBounds { min: self.min_code_tokens, max: self.max_code_tokens });
        }
        Ok(())
    }
}

fn check_threshold(tau: f64) -> Result<(), FilterError> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(FilterError::InvalidThreshold(tau))
    }
}

/// Whether `record` meets the threshold (inclusive).
pub fn passes_side(record: &CorpusRecord, tau: f64) -> Result<bool, FilterError> {
    match record.side_score {
        Some(score) => Ok(score >= tau),
        None => Err(FilterError::MissingScore { record_id: record.id.clone() }),
    }
}

/// Keeps records with `side_score >= tau`, in order. Records without a
/// score surface as `MissingScore` items; the stream continues past them.
pub fn filter_by_side<I>(
    records: I,
    tau: f64,
) -> Result<impl Iterator<Item = Result<CorpusRecord, FilterError>>, FilterError>
where
    I: IntoIterator<Item = CorpusRecord>,
{
    check_threshold(tau)?;
    Ok(records.into_iter().filter_map(move |r| match passes_side(&r, tau) {
        Ok(true) => Some(Ok(r)),
        Ok(false) => None,
        Err(e) => Some(Err(e)),
    }))
}

/// Applies the benchmark predicates to one record, returning the record as
/// it would be kept (with its summary cut to the first sentence when
/// configured) or `None` when it is dropped.
pub fn benchmark_view(record: &CorpusRecord, cfg: &FilterConfig) -> Option<CorpusRecord> {
    let code_tokens = lex_code(&record.code, record.language).len();
    if code_tokens < cfg.min_code_tokens || code_tokens > cfg.max_code_tokens {
        return None;
    }
    let summary = if cfg.apply_first_sentence { first_sentence(&record.summary) } else { record.summary.as_str() };
    if lex_summary(summary).len() <= cfg.min_summary_tokens {
        return None;
    }
    let mut kept = record.clone();
    if kept.summary != summary {
        kept.summary = summary.to_string();
    }
    Some(kept)
}

/// Keeps records whose code length lies within the inclusive token bounds
/// and whose summary is longer than `min_summary_tokens`.
pub fn filter_benchmark<'c, I>(
    records: I,
    cfg: &'c FilterConfig,
) -> Result<impl Iterator<Item = CorpusRecord> + 'c, FilterError>
where
    I: IntoIterator<Item = CorpusRecord>,
    I::IntoIter: 'c,
{
    cfg.validate()?;
    Ok(records.into_iter().filter_map(move |r| benchmark_view(&r, cfg)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::Language;
    use alloc::vec::Vec;

    fn scored(id: &str, s: Option<f64>) -> CorpusRecord {
        let r = CorpusRecord::new(id, Language::Java, "x", "y");
        match s {
            Some(s) => r.with_side_score(s),
            None => r,
        }
    }

    #[test]
    fn side_threshold_is_inclusive() {
        let rs = [scored("a", Some(0.95)), scored("b", Some(0.90)), scored("c", Some(0.89))];
        let kept: Vec<String> = filter_by_side(rs, 0.9).unwrap().map(|r| r.unwrap().id).collect();
        assert_eq!(kept, ["a", "b"]);
    }

    #[test]
    fn missing_score_is_reported_in_stream() {
        let rs = [scored("a", None), scored("b", Some(1.0))];
        let out: Vec<_> = filter_by_side(rs, 0.5).unwrap().collect();
        assert_eq!(out[0], Err(FilterError::MissingScore { record_id: "a".into() }));
        assert!(out[1].is_ok());
        assert!(filter_by_side(Vec::new(), 1.5).is_err());
    }

    #[test]
    fn first_sentence_precedes_length_check() {
        let cfg = FilterConfig { min_code_tokens: 1, ..FilterConfig::default() };
        let r = CorpusRecord::new("a", Language::Java, "f ( )", "Too short. But the rest is long enough");
        assert_eq!(benchmark_view(&r, &cfg), None);
        let no_cut = FilterConfig { apply_first_sentence: false, ..cfg };
        assert!(benchmark_view(&r, &no_cut).is_some());
    }

    #[test]
    fn bounds_validation() {
        let cfg = FilterConfig { min_code_tokens: 5, max_code_tokens: 4, ..FilterConfig::default() };
        assert!(filter_benchmark(Vec::new(), &cfg).is_err());
    }
}
