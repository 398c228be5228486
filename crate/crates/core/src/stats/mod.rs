//! Paired significance testing: Wilcoxon signed-rank, Cliff's delta and
//! Holm step-down correction.

mod cliffs;
mod compare;
mod holm;
mod wilcoxon;

pub use cliffs::{cliffs_delta, EffectSize, Magnitude};
pub use compare::{compare_systems, render_p, CompareConfig, Comparison, Correction, TestReport};
pub use holm::holm_bonferroni;
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonMode, WilcoxonResult, EXACT_MAX_N};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("paired samples differ in length: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("sample is empty")]
    EmptyInput,
    #[error("p-value {0} is outside [0, 1]")]
    OutOfRangeP(f64),
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("significance level {0} is outside (0, 1)")]
    InvalidAlpha(f64),
}
