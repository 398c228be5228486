use alloc::vec::Vec;
use core::fmt;

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    /// Band of `|delta|`: below 0.147, 0.33 and 0.474 respectively, each
    /// band closed on the left.
    pub fn of(delta: f64) -> Self {
        let d = delta.abs();
        if d < 0.147 {
            Magnitude::Negligible
        } else if d < 0.33 {
            Magnitude::Small
        } else if d < 0.474 {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }

    /// One-letter code: N, S, M or L.
    pub fn code(self) -> &'static str {
        match self {
            Magnitude::Negligible => "N",
            Magnitude::Small => "S",
            Magnitude::Medium => "M",
            Magnitude::Large => "L",
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EffectSize {
    pub delta: f64,
    pub magnitude: Magnitude,
}

impl EffectSize {
    pub fn new(delta: f64) -> Self {
        EffectSize { delta, magnitude: Magnitude::of(delta) }
    }
}

/// Cliff's delta: `(#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|)`.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<EffectSize, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted: Vec<f64> = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dominance: i128 = 0;
    for &x in a {
        let below = sorted.partition_point(|&y| y < x);
        let above = sorted.len() - sorted.partition_point(|&y| y <= x);
        dominance += below as i128 - above as i128;
    }
    let delta = dominance as f64 / (a.len() as f64 * b.len() as f64);
    Ok(EffectSize::new(delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        assert_eq!(cliffs_delta(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap().delta, 0.0);
        let all_less = cliffs_delta(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(all_less.delta, -1.0);
        assert_eq!(all_less.magnitude, Magnitude::Large);
    }

    #[test]
    fn band_edges() {
        assert_eq!(Magnitude::of(0.1469), Magnitude::Negligible);
        assert_eq!(Magnitude::of(0.147), Magnitude::Small);
        assert_eq!(Magnitude::of(-0.33), Magnitude::Medium);
        assert_eq!(Magnitude::of(0.474), Magnitude::Large);
        assert_eq!(Magnitude::of(-0.729).code(), "L");
    }
}
