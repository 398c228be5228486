use alloc::string::String;
use alloc::vec::Vec;

use super::stem::porter_stem;
use super::{lowercase_all, Metric, MetricError, MetricScore};
use crate::float::pow;

const ALPHA: f64 = 0.9;
const BETA: f64 = 3.0;
const GAMMA: f64 = 0.5;

/// Adds matches for candidate positions still unaligned, using `key` to
/// compare words. Each candidate word takes the first free reference
/// position after the previous alignment, falling back to the first free
/// position overall, which keeps in-order runs together.
fn align_stage(
    cand: &[String],
    refr: &[String],
    key: impl Fn(&str) -> String,
    align: &mut [Option<usize>],
    used: &mut [bool],
) {
    let cand_keys: Vec<String> = cand.iter().map(|w| key(w)).collect();
    let ref_keys: Vec<String> = refr.iter().map(|w| key(w)).collect();
    let mut last: Option<usize> = None;
    for i in 0..cand.len() {
        if let Some(j) = align[i] {
            last = Some(j);
            continue;
        }
        let free = |j: &usize| !used[*j] && ref_keys[*j] == cand_keys[i];
        let after = last.map_or(0, |l| l + 1);
        let pick = (after..refr.len()).find(free).or_else(|| (0..after.min(refr.len())).find(free));
        if let Some(j) = pick {
            align[i] = Some(j);
            used[j] = true;
            last = Some(j);
        }
    }
}

/// METEOR with exact and Porter-stem matching, α = 0.9, β = 3, γ = 0.5.
pub fn meteor<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> Result<MetricScore, MetricError> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let cand = lowercase_all(candidate);
    let refr = lowercase_all(reference);
    let mut align: Vec<Option<usize>> = alloc::vec![None; cand.len()];
    let mut used = alloc::vec![false; refr.len()];
    align_stage(&cand, &refr, |w| String::from(w), &mut align, &mut used);
    align_stage(&cand, &refr, porter_stem, &mut align, &mut used);

    let pairs: Vec<(usize, usize)> = align.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i, j))).collect();
    let matches = pairs.len();
    if matches == 0 {
        return Ok(MetricScore::new(Metric::Meteor, 0.0).with("matches", 0.0).with("chunks", 0.0));
    }
    let chunks = 1 + pairs.windows(2).filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1)).count();
    let m = matches as f64;
    let p = m / cand.len() as f64;
    let r = m / refr.len() as f64;
    let f_mean = p * r / (ALPHA * p + (1.0 - ALPHA) * r);
    let penalty = GAMMA * pow(chunks as f64 / m, BETA);
    let value = (f_mean * (1.0 - penalty)).clamp(0.0, 1.0);
    Ok(MetricScore::new(Metric::Meteor, value)
        .with("precision", p)
        .with("recall", r)
        .with("f_mean", f_mean)
        .with("penalty", penalty)
        .with("matches", m)
        .with("chunks", chunks as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_penalty() {
        let s = meteor(&["a", "b", "c", "d", "e"], &["a", "b", "c", "d", "e"]).unwrap();
        assert!((s.value - (1.0 - 0.5 / 125.0)).abs() < 1e-12);
    }

    #[test]
    fn single_match() {
        let s = meteor(&["the", "cat"], &["the", "dog"]).unwrap();
        assert!((s.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn stem_stage() {
        let s = meteor(&["formats", "events"], &["format", "event"]).unwrap();
        assert_eq!(s.component("matches"), Some(2.0));
        assert_eq!(s.component("chunks"), Some(1.0));
    }

    #[test]
    fn no_matches() {
        assert_eq!(meteor(&["x"], &["y"]).unwrap().value, 0.0);
        assert_eq!(meteor::<&str>(&["x"], &[]), Err(MetricError::EmptyInput));
    }

    #[test]
    fn repeated_words_stay_in_order() {
        let s = meteor(&["a", "b", "a", "b"], &["a", "b", "a", "b"]).unwrap();
        assert_eq!(s.component("chunks"), Some(1.0));
    }
}
