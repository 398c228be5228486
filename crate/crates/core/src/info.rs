//! Token distributions, Shannon entropy and pooled token retention.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::float::{log2, pairwise_sum};
use crate::reduce::ReductionOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum InfoError {
    #[error("entropy of an empty distribution is undefined")]
    EmptyDistribution,
    #[error("baseline entropy is zero")]
    ZeroBaseline,
    #[error("no reduction outcomes to aggregate")]
    EmptyStream,
    #[error("outcomes contain no input tokens")]
    ZeroInputTokens,
}

/// Occurrence counts of tokens. Merging is associative and commutative.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenDistribution {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl TokenDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a distribution from explicit counts; zero counts are skipped.
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut dist = Self::new();
        for (token, count) in counts {
            dist.add(token.into(), count);
        }
        dist
    }

    fn add(&mut self, token: String, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(token).or_insert(0) += count;
        self.total += count;
    }

    pub fn observe<'a, I>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = &'a str>,
    {
        for token in tokens {
            match self.counts.get_mut(token) {
                Some(c) => *c += 1,
                None => {
                    self.counts.insert(String::from(token), 1);
                }
            }
            self.total += 1;
        }
    }

    pub fn merge(&mut self, other: TokenDistribution) {
        for (token, count) in other.counts {
            self.add(token, count);
        }
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn probability(&self, token: &str) -> f64 {
        match self.counts.get(token) {
            Some(&c) => c as f64 / self.total as f64,
            None => 0.0,
        }
    }
}

/// Entropy of one distribution, optionally against a baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntropyReport {
    /// Bits per token.
    pub entropy_bits: f64,
    pub distinct_tokens: usize,
    pub baseline_entropy_bits: Option<f64>,
    pub entropy_reduction_pct: Option<f64>,
}

impl EntropyReport {
    /// A report holding only an entropy value.
    pub fn from_bits(entropy_bits: f64, distinct_tokens: usize) -> Self {
        EntropyReport { entropy_bits, distinct_tokens, baseline_entropy_bits: None, entropy_reduction_pct: None }
    }

    /// Attaches `baseline` and the resulting reduction percentage.
    pub fn against(mut self, baseline: &EntropyReport) -> Result<Self, InfoError> {
        self.entropy_reduction_pct = Some(entropy_reduction(&self, baseline)?);
        self.baseline_entropy_bits = Some(baseline.entropy_bits);
        Ok(self)
    }
}

/// Counts every token of every sequence.
pub fn accumulate_distribution<'a, I, S>(sequences: I) -> TokenDistribution
where
    I: IntoIterator<Item = &'a S>,
    S: 'a + AsRef<[String]> + ?Sized,
{
    let mut dist = TokenDistribution::new();
    for seq in sequences {
        dist.observe(seq.as_ref().iter().map(String::as_str));
    }
    dist
}

impl AsRef<[String]> for crate::lexer::TokenSequence {
    fn as_ref(&self) -> &[String] {
        self.tokens()
    }
}

/// `-Σ p log2 p` over the distribution, in bits per token.
///
/// Terms are summed in ascending count order, so the value depends only on
/// the multiset of counts.
pub fn shannon_entropy(dist: &TokenDistribution) -> Result<EntropyReport, InfoError> {
    if dist.total == 0 {
        return Err(InfoError::EmptyDistribution);
    }
    let total = dist.total as f64;
    let mut counts: Vec<u64> = dist.counts.values().copied().collect();
    counts.sort_unstable();
    let terms: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * log2(p)
        })
        .collect();
    // -p log2 p is non-negative term by term; clamp the p = 1 case's -0.0
    let bits = pairwise_sum(&terms).max(0.0);
    Ok(EntropyReport::from_bits(bits, dist.counts.len()))
}

/// `100 · (baseline − optimized) / baseline`; negative when entropy rose.
pub fn entropy_reduction(optimized: &EntropyReport, baseline: &EntropyReport) -> Result<f64, InfoError> {
    entropy_reduction_bits(optimized.entropy_bits, baseline.entropy_bits)
}

/// [`entropy_reduction`] over raw bit values.
pub fn entropy_reduction_bits(optimized: f64, baseline: f64) -> Result<f64, InfoError> {
    if baseline == 0.0 {
        return Err(InfoError::ZeroBaseline);
    }
    Ok(100.0 * (baseline - optimized) / baseline)
}

/// Pooled input and output token counts over reduction outcomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RetentionTally {
    pub records: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl RetentionTally {
    pub fn observe(&mut self, outcome: &ReductionOutcome) {
        self.observe_counts(outcome.input_token_count as u64, outcome.output_token_count as u64);
    }

    pub fn observe_counts(&mut self, input: u64, output: u64) {
        self.records += 1;
        self.input_tokens += input;
        self.output_tokens += output;
    }

    pub fn merge(&mut self, other: &RetentionTally) {
        self.records += other.records;
        self.input_tokens += other.input_tokens;
        self.output_tokens += other.output_tokens;
    }

    /// `Σ output / Σ input`.
    pub fn retention(&self) -> Result<f64, InfoError> {
        if self.records == 0 {
            return Err(InfoError::EmptyStream);
        }
        if self.input_tokens == 0 {
            return Err(InfoError::ZeroInputTokens);
        }
        Ok(self.output_tokens as f64 / self.input_tokens as f64)
    }
}

/// Corpus-level retention: total output tokens over total input tokens.
pub fn aggregate_retention<'a, I>(outcomes: I) -> Result<f64, InfoError>
where
    I: IntoIterator<Item = &'a ReductionOutcome>,
{
    let mut tally = RetentionTally::default();
    for o in outcomes {
        tally.observe(o);
    }
    tally.retention()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn counting_and_entropy() {
        let a = vec![String::from("a"), String::from("a"), String::from("b")];
        let b = vec![String::from("c")];
        let dist = accumulate_distribution([&a, &b]);
        assert_eq!(dist.total(), 4);
        assert_eq!(dist.counts().get("a"), Some(&2));
        let h = shannon_entropy(&dist).unwrap();
        assert!((h.entropy_bits - 1.5).abs() < 1e-12);
        assert_eq!(h.distinct_tokens, 3);
    }

    #[test]
    fn degenerate_cases() {
        assert_eq!(shannon_entropy(&TokenDistribution::new()), Err(InfoError::EmptyDistribution));
        let one = TokenDistribution::from_counts([("x", 7)]);
        assert_eq!(shannon_entropy(&one).unwrap().entropy_bits, 0.0);
        let z = EntropyReport::from_bits(0.0, 1);
        assert_eq!(entropy_reduction(&z, &z), Err(InfoError::ZeroBaseline));
    }

    #[test]
    fn reduction_percent() {
        let pct = entropy_reduction_bits(2.735, 4.095).unwrap();
        assert!((pct - 33.211233211).abs() < 1e-6);
        let r = EntropyReport::from_bits(3.0, 8).against(&EntropyReport::from_bits(3.0, 8)).unwrap();
        assert_eq!(r.entropy_reduction_pct, Some(0.0));
    }

    #[test]
    fn pooled_retention() {
        let mut t = RetentionTally::default();
        t.observe_counts(10, 5);
        t.observe_counts(30, 5);
        assert_eq!(t.retention(), Ok(0.25));
        assert_eq!(RetentionTally::default().retention(), Err(InfoError::EmptyStream));
        let mut z = RetentionTally::default();
        z.observe_counts(0, 0);
        assert_eq!(z.retention(), Err(InfoError::ZeroInputTokens));
    }
}
