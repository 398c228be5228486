use alloc::vec::Vec;

use super::StatsError;
use crate::float::{erfc, sqrt};

/// Largest number of non-zero differences tested with the exact null
/// distribution under [`WilcoxonMode::ExactSmallN`].
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WilcoxonMode {
    /// Exact distribution up to [`EXACT_MAX_N`] pairs, normal beyond.
    #[default]
    ExactSmallN,
    /// Normal approximation with tie and continuity corrections.
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Two-sided p-value.
    pub p_value: f64,
    /// `min(w_plus, w_minus)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Pairs left after dropping zero differences.
    pub n_used: usize,
    pub n_zero: usize,
    pub exact: bool,
    /// Every difference was zero; the p-value is 1 by convention.
    pub all_zero: bool,
}

/// Midranks (1-based) of `values`, which must be sorted ascending.
fn midranks(sorted: &[f64]) -> Vec<f64> {
    let mut ranks = alloc::vec![0.0; sorted.len()];
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        ranks[i..=j].iter_mut().for_each(|x| *x = r);
        i = j + 1;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test on the differences `a[i] - b[i]`.
///
/// Zero differences are dropped and tied magnitudes share midranks.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], mode: WilcoxonMode) -> Result<WilcoxonResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut diffs: Vec<f64> = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        if !d.is_finite() {
            return Err(StatsError::NonFinite);
        }
        if d != 0.0 {
            diffs.push(d);
        }
    }
    let n = diffs.len();
    let n_zero = a.len() - n;
    if n == 0 {
        return Ok(WilcoxonResult {
            p_value: 1.0,
            statistic: 0.0,
            w_plus: 0.0,
            w_minus: 0.0,
            n_used: 0,
            n_zero,
            exact: true,
            all_zero: true,
        });
    }
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&magnitudes);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);
    let exact = mode == WilcoxonMode::ExactSmallN && n <= EXACT_MAX_N;
    let p_value = if exact { exact_p(&ranks, statistic) } else { normal_p(&magnitudes, &ranks, w_plus) };
    Ok(WilcoxonResult { p_value, statistic, w_plus, w_minus, n_used: n, n_zero, exact, all_zero: false })
}

/// `min(1, 2 P(T <= w))` under the permutation distribution of the signed
/// rank sum. Doubling makes midranks integral, so the distribution is a
/// subset-sum count over the doubled ranks.
fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0) as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = alloc::vec![0u64; max + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = (w * 2.0) as usize;
    let tail: u64 = counts[..=limit.min(max)].iter().sum();
    let all = (1u64 << ranks.len()) as f64;
    (2.0 * tail as f64 / all).min(1.0)
}

fn normal_p(sorted_magnitudes: &[f64], ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted_magnitudes.len() {
        let mut j = i;
        while j + 1 < sorted_magnitudes.len() && sorted_magnitudes[j + 1] == sorted_magnitudes[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / sqrt(var);
    erfc(z / core::f64::consts::SQRT_2).min(1.0)
}
