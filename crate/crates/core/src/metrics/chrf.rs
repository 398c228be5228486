use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Metric, MetricError, MetricScore};

fn char_ngrams(chars: &[char], n: usize) -> BTreeMap<&[char], u64> {
    let mut counts = BTreeMap::new();
    for w in chars.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// chrF with character n-grams up to 6 and β = 2.
pub fn chrf(candidate: &str, reference: &str) -> Result<MetricScore, MetricError> {
    chrf_with(candidate, reference, 6, 2.0)
}

/// Character n-gram F-score. Whitespace is removed; precision and recall
/// are averaged over the orders for which both sides have n-grams, then
/// combined as F-beta.
pub fn chrf_with(candidate: &str, reference: &str, max_char_n: usize, beta: f64) -> Result<MetricScore, MetricError> {
    let cand: Vec<char> = candidate.chars().filter(|c| !c.is_whitespace()).collect();
    let refr: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if cand.is_empty() || refr.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let (mut p_sum, mut r_sum, mut orders) = (0.0, 0.0, 0usize);
    for n in 1..=max_char_n {
        if cand.len() < n || refr.len() < n {
            break;
        }
        let c = char_ngrams(&cand, n);
        let r = char_ngrams(&refr, n);
        let matched: u64 = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
        p_sum += matched as f64 / (cand.len() - n + 1) as f64;
        r_sum += matched as f64 / (refr.len() - n + 1) as f64;
        orders += 1;
    }
    let p = p_sum / orders as f64;
    let r = r_sum / orders as f64;
    let b2 = beta * beta;
    let f = if p + r == 0.0 { 0.0 } else { (1.0 + b2) * p * r / (b2 * p + r) };
    Ok(MetricScore::new(Metric::ChrF, f).with("precision", p).with("recall", r).with("orders", orders as f64))
}
