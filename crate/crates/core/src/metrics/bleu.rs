use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{lowercase_all, Metric, MetricError, MetricScore};
use crate::float::{exp, ln};

/// Treatment of n-gram orders with no matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Smoothing {
    /// A zero precision makes the score zero.
    #[default]
    None,
    /// A zero match count is replaced by 1e-9.
    Epsilon,
    /// A zero precision `0/d` becomes `1/(d+1)`.
    AddOne,
}

const EPSILON: f64 = 1e-9;

/// Clipped n-gram match counts and lengths; pooled over a corpus by
/// [`BleuStats::merge`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub max_n: usize,
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub candidate_len: u64,
    pub reference_len: u64,
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], u64> {
    let mut counts = BTreeMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

impl BleuStats {
    pub fn new(max_n: usize) -> Self {
        BleuStats {
            max_n,
            matches: alloc::vec![0; max_n],
            totals: alloc::vec![0; max_n],
            candidate_len: 0,
            reference_len: 0,
        }
    }

    /// Counts for one lowercased candidate against its references.
    pub fn sentence<T: AsRef<str>>(candidate: &[T], references: &[Vec<T>], max_n: usize) -> Result<Self, MetricError> {
        if candidate.is_empty() {
            return Err(MetricError::EmptyCandidate);
        }
        if references.is_empty() {
            return Err(MetricError::EmptyReferences);
        }
        let cand = lowercase_all(candidate);
        let refs: Vec<Vec<String>> = references.iter().map(|r| lowercase_all(r)).collect();
        let mut stats = BleuStats::new(max_n);
        for n in 1..=max_n {
            let cand_counts = ngram_counts(&cand, n);
            let mut max_ref: BTreeMap<&[String], u64> = BTreeMap::new();
            for r in &refs {
                for (gram, c) in ngram_counts(r, n) {
                    let slot = max_ref.entry(gram).or_insert(0);
                    *slot = (*slot).max(c);
                }
            }
            let matched: u64 = cand_counts.iter().map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0))).sum();
            stats.matches[n - 1] = matched;
            stats.totals[n - 1] = cand.len().saturating_sub(n - 1) as u64;
        }
        stats.candidate_len = cand.len() as u64;
        // closest reference length; ties go to the shorter one
        let c = cand.len() as i64;
        stats.reference_len =
            refs.iter().map(|r| r.len() as i64).min_by_key(|&len| ((len - c).abs(), len)).unwrap_or(0) as u64;
        Ok(stats)
    }

    pub fn merge(&mut self, other: &BleuStats) {
        assert_eq!(self.max_n, other.max_n, "merging BLEU statistics of different orders");
        for n in 0..self.max_n {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.candidate_len == 0 {
            0.0
        } else if self.candidate_len > self.reference_len {
            1.0
        } else {
            exp(1.0 - self.reference_len as f64 / self.candidate_len as f64)
        }
    }

    /// Smoothed precision of each order.
    pub fn precisions(&self, smoothing: Smoothing) -> Vec<f64> {
        (0..self.max_n)
            .map(|n| {
                let (m, t) = (self.matches[n], self.totals[n]);
                match (m, smoothing) {
                    (0, Smoothing::None) => 0.0,
                    (0, Smoothing::Epsilon) => EPSILON / t.max(1) as f64,
                    (0, Smoothing::AddOne) => 1.0 / (t + 1) as f64,
                    _ => m as f64 / t as f64,
                }
            })
            .collect()
    }

    pub fn score(&self, smoothing: Smoothing) -> MetricScore {
        let precisions = self.precisions(smoothing);
        let bp = self.brevity_penalty();
        let value = if precisions.contains(&0.0) {
            0.0
        } else {
            let mean_log = precisions.iter().map(|&p| ln(p)).sum::<f64>() / self.max_n as f64;
            (bp * exp(mean_log)).clamp(0.0, 1.0)
        };
        const NAMES: [&str; 4] = ["p1", "p2", "p3", "p4"];
        let mut score = MetricScore::new(Metric::Bleu, value);
        for (i, p) in precisions.into_iter().enumerate() {
            score = score.with(NAMES.get(i).copied().unwrap_or("pn"), p);
        }
        score
            .with("brevity_penalty", bp)
            .with("candidate_len", self.candidate_len as f64)
            .with("reference_len", self.reference_len as f64)
    }
}

/// Sentence BLEU: geometric mean of clipped n-gram precisions for
/// `n = 1..=max_n` times the brevity penalty.
pub fn bleu<T: AsRef<str>>(
    candidate: &[T],
    references: &[Vec<T>],
    max_n: usize,
    smoothing: Smoothing,
) -> Result<MetricScore, MetricError> {
    Ok(BleuStats::sentence(candidate, references, max_n)?.score(smoothing))
}

/// Corpus BLEU over pooled counts of `(candidate, references)` pairs.
pub fn corpus_bleu<'a, T, I>(pairs: I, max_n: usize, smoothing: Smoothing) -> Result<MetricScore, MetricError>
where
    T: AsRef<str> + 'a,
    I: IntoIterator<Item = (&'a [T], &'a [Vec<T>])>,
{
    let mut pooled = BleuStats::new(max_n);
    let mut any = false;
    for (cand, refs) in pairs {
        pooled.merge(&BleuStats::sentence(cand, refs, max_n)?);
        any = true;
    }
    if !any {
        return Err(MetricError::EmptyInput);
    }
    Ok(pooled.score(smoothing))
}
