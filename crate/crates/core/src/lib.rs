//! Core algorithms for optimizing code summarization corpora.
//!
//! Everything in this crate is a pure function over in-memory values: lexing,
//! syntax trees, the three token reducers, row filters, entropy accounting,
//! summary-quality metrics and the paired significance protocol. File formats,
//! streaming IO and the command-line surface live in the `sumopt` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod filter;
pub mod info;
pub mod lexer;
pub mod metrics;
pub mod record;
pub mod reduce;
pub mod stats;
pub mod syntax;

mod float;

pub use crate::filter::{filter_benchmark, filter_by_side, FilterConfig, FilterError};
pub use crate::info::{
    accumulate_distribution, aggregate_retention, entropy_reduction, shannon_entropy, EntropyReport, InfoError,
    TokenDistribution,
};
pub use crate::lexer::{first_sentence, lex_code, lex_summary, Origin, TokenSequence};
pub use crate::record::{CorpusRecord, CorpusStats, Language, RecordError, Strategy};
pub use crate::reduce::{
    build_ban_list, reduce_ast, reduce_crystalbleu, reduce_signature, NgramBanList, ReduceError, ReductionOutcome,
};
