use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Metric, MetricError, MetricScore};

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn has_word_char(s: &str) -> bool {
    s.chars().any(char::is_alphanumeric)
}

/// Splits an identifier at underscores, `$`, and lower-to-upper or
/// acronym-to-word case boundaries: `parseHTTPResponse_v2` yields `parse`,
/// `HTTP`, `Response`, `v2`.
fn identifier_parts(token: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    for piece in token.split(['_', '$']) {
        let chars: Vec<(usize, char)> = piece.char_indices().collect();
        let mut start = 0;
        for k in 1..chars.len() {
            let (i, c) = chars[k];
            let prev = chars[k - 1].1;
            let next_lower = chars.get(k + 1).is_some_and(|&(_, n)| n.is_lowercase());
            let boundary = (c.is_uppercase() && (prev.is_lowercase() || prev.is_ascii_digit()))
                || (c.is_uppercase() && prev.is_uppercase() && next_lower);
            if boundary {
                parts.push(&piece[start..i]);
                start = i;
            }
        }
        if start < piece.len() {
            parts.push(&piece[start..]);
        }
    }
    parts
}

/// Lowercased code words: every token with a letter or digit, plus the
/// parts of compound identifiers.
pub fn code_words<T: AsRef<str>>(code_tokens: &[T]) -> BTreeSet<String> {
    let mut words = BTreeSet::new();
    for token in code_tokens {
        let token = token.as_ref();
        if !has_word_char(token) {
            continue;
        }
        words.insert(token.to_lowercase());
        for part in identifier_parts(token) {
            if has_word_char(part) {
                words.insert(part.to_lowercase());
            }
        }
    }
    words
}

/// Fraction of summary words within edit distance 1 of some code word.
pub fn c_coeff<S: AsRef<str>, C: AsRef<str>>(summary: &[S], code_tokens: &[C]) -> Result<MetricScore, MetricError> {
    let words: Vec<String> =
        summary.iter().map(|t| t.as_ref()).filter(|t| has_word_char(t)).map(str::to_lowercase).collect();
    if words.is_empty() {
        return Err(MetricError::EmptySummary);
    }
    let code = code_words(code_tokens);
    let matched = words
        .iter()
        .filter(|w| {
            code.contains(*w) || {
                let len = w.chars().count();
                code.iter().any(|c| c.chars().count().abs_diff(len) <= 1 && levenshtein(w, c) < 2)
            }
        })
        .count();
    Ok(MetricScore::new(Metric::CCoeff, matched as f64 / words.len() as f64)
        .with("matched", matched as f64)
        .with("words", words.len() as f64))
}
