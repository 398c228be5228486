use alloc::vec::Vec;

use super::{lowercase_all, Metric, MetricError, MetricScore};

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = alloc::vec![0usize; short.len() + 1];
    let mut cur = alloc::vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// ROUGE-L F1 from the longest common subsequence of the token lists.
pub fn rouge_l<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> Result<MetricScore, MetricError> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let cand: Vec<_> = lowercase_all(candidate);
    let refr: Vec<_> = lowercase_all(reference);
    let lcs = lcs_len(&cand, &refr);
    let p = lcs as f64 / cand.len() as f64;
    let r = lcs as f64 / refr.len() as f64;
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    Ok(MetricScore::new(Metric::RougeL, f).with("lcs", lcs as f64).with("precision", p).with("recall", r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transposition() {
        let s = rouge_l(&["a", "b", "c", "d"], &["a", "c", "b", "d"]).unwrap();
        assert_eq!(s.component("lcs"), Some(3.0));
        assert!((s.value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn disjoint_and_empty() {
        assert_eq!(rouge_l(&["a"], &["b"]).unwrap().value, 0.0);
        assert_eq!(rouge_l::<&str>(&[], &["b"]), Err(MetricError::EmptyInput));
    }
}
