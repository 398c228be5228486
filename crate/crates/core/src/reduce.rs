//! The three token reducers and n-gram ban-list mining.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::lexer::{lex_code, Origin, TokenSequence};
use crate::record::{CorpusRecord, Language, Strategy};
use crate::syntax::{parse, signature_span};

/// Largest n-gram order the miner supports.
pub const MAX_NGRAM_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReduceError {
    #[error("cannot mine n-grams from an empty corpus")]
    EmptyCorpus,
    #[error("invalid ban-list parameters: k={k}, max_n={max_n}")]
    InvalidParameters { k: usize, max_n: usize },
    #[error("invalid ban list: {0}")]
    InvalidBanList(String),
    #[error("record {record_id}: crystalbleu reduction needs a ban list")]
    MissingBanList { record_id: String },
    #[error("record {record_id}: code has no tokens")]
    EmptyInput { record_id: String },
    #[error("record {}: every token was removed", .0.record_id)]
    EmptyAfterReduction(Box<ReductionOutcome>),
    #[error("record {record_id}: no function or method declaration found")]
    NoDeclarationFound { record_id: String },
    #[error("record {record_id}: parse error at byte {position}: {message}")]
    ParseFailure { record_id: String, position: usize, message: String },
}

impl ReduceError {
    /// Id of the record the error refers to, if any.
    pub fn record_id(&self) -> Option<&str> {
        match self {
            ReduceError::MissingBanList { record_id }
            | ReduceError::EmptyInput { record_id }
            | ReduceError::NoDeclarationFound { record_id }
            | ReduceError::ParseFailure { record_id, .. } => Some(record_id),
            ReduceError::EmptyAfterReduction(outcome) => Some(&outcome.record_id),
            _ => None,
        }
    }
}

/// Result of reducing one record.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutcome {
    pub record_id: String,
    pub strategy: Strategy,
    pub reduced_tokens: TokenSequence,
    /// `output_token_count / input_token_count`; an empty input counts as one
    /// token so the ratio stays finite.
    pub token_retention: f64,
    pub input_token_count: usize,
    pub output_token_count: usize,
}

impl ReductionOutcome {
    fn new(record_id: &str, strategy: Strategy, reduced_tokens: TokenSequence, input_token_count: usize) -> Self {
        let output_token_count = reduced_tokens.len();
        ReductionOutcome {
            record_id: String::from(record_id),
            strategy,
            token_retention: output_token_count as f64 / input_token_count.max(1) as f64,
            reduced_tokens,
            input_token_count,
            output_token_count,
        }
    }

    /// True when the representation is longer than its source, which is
    /// legal for AST serialization but worth a warning.
    pub fn exceeds_input(&self) -> bool {
        self.output_token_count > self.input_token_count
    }

    /// The text stored as `reduced_code`.
    pub fn reduced_code(&self) -> String {
        self.reduced_tokens.render()
    }

    /// Copy of `record` with `reduced_code` and `strategy` populated.
    pub fn apply_to(&self, record: &CorpusRecord) -> CorpusRecord {
        record.clone().with_reduction(self.strategy, self.reduced_code())
    }
}

/// The most frequent n-grams of a training corpus, `k` per order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramBanList {
    max_n: usize,
    k: usize,
    entries: BTreeMap<Vec<String>, u64>,
    source_fingerprint: String,
}

impl NgramBanList {
    /// Assembles a ban list from stored parts, checking its invariants.
    pub fn from_parts(
        max_n: usize,
        k: usize,
        entries: BTreeMap<Vec<String>, u64>,
        source_fingerprint: String,
    ) -> Result<Self, ReduceError> {
        if k == 0 || !(1..=MAX_NGRAM_ORDER).contains(&max_n) {
            return Err(ReduceError::InvalidParameters { k, max_n });
        }
        let mut per_order = [0usize; MAX_NGRAM_ORDER];
        for (gram, &freq) in &entries {
            if gram.is_empty() || gram.len() > max_n {
                return Err(ReduceError::InvalidBanList(alloc::format!(
                    "n-gram of length {} outside 1..={max_n}",
                    gram.len()
                )));
            }
            if freq == 0 {
                return Err(ReduceError::InvalidBanList(String::from("zero frequency")));
            }
            per_order[gram.len() - 1] += 1;
        }
        if let Some(n) = per_order.iter().position(|&c| c > k) {
            return Err(ReduceError::InvalidBanList(alloc::format!(
                "{} entries of order {} exceed the budget k={k}",
                per_order[n],
                n + 1
            )));
        }
        Ok(NgramBanList { max_n, k, entries, source_fingerprint })
    }

    /// A ban list with no entries; crystalbleu reduction under it is the
    /// identity.
    pub fn empty(max_n: usize, k: usize) -> Result<Self, ReduceError> {
        Self::from_parts(max_n, k, BTreeMap::new(), String::new())
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &BTreeMap<Vec<String>, u64> {
        &self.entries
    }

    pub fn source_fingerprint(&self) -> &str {
        &self.source_fingerprint
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, gram: &[String]) -> bool {
        self.entries.contains_key(gram)
    }

    /// Marks every position covered by an occurrence of a banned n-gram.
    pub fn coverage(&self, tokens: &[String]) -> Vec<bool> {
        let mut covered = alloc::vec![false; tokens.len()];
        if self.entries.is_empty() {
            return covered;
        }
        for n in 1..=self.max_n.min(tokens.len()) {
            for (i, window) in tokens.windows(n).enumerate() {
                if self.entries.contains_key(window) {
                    covered[i..i + n].iter_mut().for_each(|c| *c = true);
                }
            }
        }
        covered
    }
}

/// Per-order n-gram frequencies; shards merge associatively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramCounts {
    max_n: usize,
    orders: Vec<BTreeMap<Vec<String>, u64>>,
}

impl NgramCounts {
    pub fn new(max_n: usize) -> Self {
        NgramCounts { max_n, orders: alloc::vec![BTreeMap::new(); max_n] }
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn observe(&mut self, tokens: &[String]) {
        for n in 1..=self.max_n {
            let counts = &mut self.orders[n - 1];
            for window in tokens.windows(n) {
                match counts.get_mut(window) {
                    Some(c) => *c += 1,
                    None => {
                        counts.insert(window.to_vec(), 1);
                    }
                }
            }
        }
    }

    pub fn merge(&mut self, other: NgramCounts) {
        assert_eq!(self.max_n, other.max_n, "merging counts of different orders");
        for (mine, theirs) in self.orders.iter_mut().zip(other.orders) {
            if mine.len() < theirs.len() {
                let smaller = core::mem::replace(mine, theirs);
                for (gram, c) in smaller {
                    *mine.entry(gram).or_insert(0) += c;
                }
            } else {
                for (gram, c) in theirs {
                    *mine.entry(gram).or_insert(0) += c;
                }
            }
        }
    }

    /// Count of one n-gram.
    pub fn get(&self, gram: &[String]) -> u64 {
        if gram.is_empty() || gram.len() > self.max_n {
            return 0;
        }
        self.orders[gram.len() - 1].get(gram).copied().unwrap_or(0)
    }

    /// Keeps the `k` most frequent n-grams per order; ties go to the
    /// lexicographically smaller n-gram.
    pub fn top_k(self, k: usize, source_fingerprint: String) -> Result<NgramBanList, ReduceError> {
        let mut entries = BTreeMap::new();
        for counts in self.orders {
            let mut ranked: Vec<(Vec<String>, u64)> = counts.into_iter().collect();
            // BTreeMap iteration is already lexicographic; a stable sort on
            // frequency alone keeps that order among ties.
            ranked.sort_by_key(|e| core::cmp::Reverse(e.1));
            entries.extend(ranked.into_iter().take(k));
        }
        NgramBanList::from_parts(self.max_n, k, entries, source_fingerprint)
    }
}

/// Order-sensitive SHA-256 digest of a sequence of records.
#[derive(Debug, Clone, Default)]
pub struct CorpusFingerprint {
    hasher: Sha256,
    records: u64,
}

impl CorpusFingerprint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, record: &CorpusRecord) {
        self.hasher.update(record.id.as_bytes());
        self.hasher.update([0u8]);
        self.hasher.update(record.language.as_str().as_bytes());
        self.hasher.update([0u8]);
        self.hasher.update(record.code.as_bytes());
        self.hasher.update([0u8]);
        self.records += 1;
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    /// Lowercase hex digest.
    pub fn finish(self) -> String {
        let digest = self.hasher.finalize();
        let mut out = String::with_capacity(digest.len() * 2);
        for b in digest.iter() {
            out.push(char::from_digit(u32::from(b >> 4), 16).expect("nibble"));
            out.push(char::from_digit(u32::from(b & 0xf), 16).expect("nibble"));
        }
        out
    }
}

/// Mines the `k` most frequent n-grams of each order `1..=max_n` from the
/// lexed code of `records`.
pub fn build_ban_list<'a, I>(records: I, k: usize, max_n: usize) -> Result<NgramBanList, ReduceError>
where
    I: IntoIterator<Item = &'a CorpusRecord>,
{
    if k == 0 || !(1..=MAX_NGRAM_ORDER).contains(&max_n) {
        return Err(ReduceError::InvalidParameters { k, max_n });
    }
    let mut counts = NgramCounts::new(max_n);
    let mut fingerprint = CorpusFingerprint::new();
    for record in records {
        counts.observe(lex_code(&record.code, record.language).tokens());
        fingerprint.observe(record);
    }
    if fingerprint.records() == 0 {
        return Err(ReduceError::EmptyCorpus);
    }
    counts.top_k(k, fingerprint.finish())
}

/// Deletes every token occurrence covered by an occurrence of a banned
/// n-gram. An empty result is reported as [`ReduceError::EmptyAfterReduction`]
/// carrying the outcome, so callers may still keep the record.
pub fn reduce_crystalbleu(record: &CorpusRecord, ban: &NgramBanList) -> Result<ReductionOutcome, ReduceError> {
    let input = lex_code(&record.code, record.language);
    if input.is_empty() {
        return Err(ReduceError::EmptyInput { record_id: record.id.clone() });
    }
    let keep: Vec<bool> = ban.coverage(input.tokens()).into_iter().map(|c| !c).collect();
    let outcome = ReductionOutcome::new(&record.id, Strategy::CrystalBleu, input.select(&keep), input.len());
    if outcome.output_token_count == 0 {
        return Err(ReduceError::EmptyAfterReduction(Box::new(outcome)));
    }
    Ok(outcome)
}

/// Keeps the header of the first function or method declaration.
pub fn reduce_signature(record: &CorpusRecord) -> Result<ReductionOutcome, ReduceError> {
    let input = lex_code(&record.code, record.language);
    let span = signature_span(&input, &record.code, record.language)
        .ok_or_else(|| ReduceError::NoDeclarationFound { record_id: record.id.clone() })?;
    let keep: Vec<bool> = (0..input.len()).map(|i| span.tokens.contains(&i)).collect();
    Ok(ReductionOutcome::new(&record.id, Strategy::Signature, input.select(&keep), input.len()))
}

/// Whether AST serialization fuses declared names into node types by default.
pub fn default_identifier_fusion(language: Language) -> bool {
    matches!(language, Language::Java)
}

/// Replaces the code with the pre-order sequence of its syntax-tree node
/// types, using the language's default identifier fusion.
pub fn reduce_ast(record: &CorpusRecord) -> Result<ReductionOutcome, ReduceError> {
    reduce_ast_with(record, default_identifier_fusion(record.language))
}

/// [`reduce_ast`] with explicit identifier fusion.
pub fn reduce_ast_with(record: &CorpusRecord, fuse_identifiers: bool) -> Result<ReductionOutcome, ReduceError> {
    let input_len = lex_code(&record.code, record.language).len();
    let tree = parse(&record.code, record.language).map_err(|e| ReduceError::ParseFailure {
        record_id: record.id.clone(),
        position: e.position,
        message: e.message,
    })?;
    let mut tokens = Vec::new();
    let mut spans = Vec::new();
    for node in tree.preorder() {
        tokens.push(node.render(fuse_identifiers));
        spans.push(node.span);
    }
    let seq = TokenSequence::from_parts(tokens, spans, Origin::AstSerialized);
    Ok(ReductionOutcome::new(&record.id, Strategy::Ast, seq, input_len))
}

/// Identity reduction: the lexical stream itself.
pub fn reduce_original(record: &CorpusRecord) -> ReductionOutcome {
    let input = lex_code(&record.code, record.language);
    let n = input.len();
    ReductionOutcome::new(&record.id, Strategy::Original, input, n)
}

/// Dispatches to the reducer for `strategy`.
pub fn reduce(
    record: &CorpusRecord,
    strategy: Strategy,
    ban: Option<&NgramBanList>,
) -> Result<ReductionOutcome, ReduceError> {
    match strategy {
        Strategy::Original => Ok(reduce_original(record)),
        Strategy::Ast => reduce_ast(record),
        Strategy::Signature => reduce_signature(record),
        Strategy::CrystalBleu => match ban {
            Some(ban) => reduce_crystalbleu(record, ban),
            None => Err(ReduceError::MissingBanList { record_id: record.id.clone() }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn java(id: &str, code: &str) -> CorpusRecord {
        CorpusRecord::new(id, Language::Java, code, "s")
    }

    fn gram(parts: &[&str]) -> Vec<String> {
        parts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn coverage_deletion() {
        let mut entries = BTreeMap::new();
        entries.insert(gram(&["public"]), 5);
        entries.insert(gram(&["static", "void"]), 3);
        let ban = NgramBanList::from_parts(2, 10, entries, String::new()).unwrap();
        let out = reduce_crystalbleu(&java("r", "public static void main"), &ban).unwrap();
        assert_eq!(out.reduced_tokens.tokens(), &["main"]);
        assert_eq!(out.input_token_count, 4);
        assert!((out.token_retention - 0.25).abs() < 1e-12);
    }

    #[test]
    fn uncommon_context_survives() {
        let mut entries = BTreeMap::new();
        entries.insert(gram(&["static", "void"]), 3);
        let ban = NgramBanList::from_parts(2, 10, entries, String::new()).unwrap();
        let out = reduce_crystalbleu(&java("r", "static int x"), &ban).unwrap();
        assert_eq!(out.output_token_count, 3);
    }

    #[test]
    fn empty_after_reduction_carries_outcome() {
        let mut entries = BTreeMap::new();
        entries.insert(gram(&["a"]), 1);
        let ban = NgramBanList::from_parts(1, 1, entries, String::new()).unwrap();
        match reduce_crystalbleu(&java("r", "a a"), &ban) {
            Err(ReduceError::EmptyAfterReduction(o)) => {
                assert_eq!(o.output_token_count, 0);
                assert_eq!(o.input_token_count, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ban_list_tie_break() {
        let records: Vec<CorpusRecord> = (0..10).map(|i| java(&i.to_string(), "public void f ( )")).collect();
        let ban = build_ban_list(&records, 2, 1).unwrap();
        let keys: Vec<&Vec<String>> = ban.entries().keys().collect();
        assert_eq!(keys, vec![&gram(&["("]), &gram(&[")"])]);
        assert!(ban.entries().values().all(|&f| f == 10));
        assert_eq!(ban.source_fingerprint().len(), 64);
    }

    #[test]
    fn fingerprint_depends_on_order() {
        let a = java("a", "x y");
        let b = java("b", "y x");
        let one = build_ban_list([&a, &b], 5, 2).unwrap();
        let two = build_ban_list([&b, &a], 5, 2).unwrap();
        assert_ne!(one.source_fingerprint(), two.source_fingerprint());
    }

    #[test]
    fn ban_list_parameter_errors() {
        let r = java("a", "x");
        assert_eq!(build_ban_list([&r], 0, 1), Err(ReduceError::InvalidParameters { k: 0, max_n: 1 }));
        assert_eq!(build_ban_list([&r], 1, 5), Err(ReduceError::InvalidParameters { k: 1, max_n: 5 }));
        assert_eq!(build_ban_list(core::iter::empty(), 1, 1), Err(ReduceError::EmptyCorpus));
    }

    #[test]
    fn signature_and_ast() {
        let r = java("r", "public String format(LoggingEvent event) { return event.toString(); }");
        let sig = reduce_signature(&r).unwrap();
        assert_eq!(sig.reduced_code(), "public String format ( LoggingEvent event )");
        let ast = reduce_ast(&r).unwrap();
        assert_eq!(ast.reduced_tokens.tokens()[0], "MethodDeclaration_format");
        assert_eq!(ast.reduced_tokens.origin(), Origin::AstSerialized);
        let bare = reduce_ast_with(&r, false).unwrap();
        assert_eq!(bare.reduced_tokens.tokens()[0], "MethodDeclaration");
    }

    #[test]
    fn signature_missing() {
        let r = java("r", "x = 1;");
        assert_eq!(reduce_signature(&r), Err(ReduceError::NoDeclarationFound { record_id: "r".to_string() }));
    }

    #[test]
    fn dispatcher() {
        let r = java("r", "int f() { return 1; }");
        let id = reduce(&r, Strategy::Original, None).unwrap();
        assert_eq!(id.token_retention, 1.0);
        assert!(matches!(reduce(&r, Strategy::CrystalBleu, None), Err(ReduceError::MissingBanList { .. })));
        let applied = id.apply_to(&r);
        assert_eq!(applied.strategy, Some(Strategy::Original));
        assert_eq!(applied.reduced_code.as_deref(), Some("int f ( ) { return 1 ; }"));
    }

    #[test]
    fn counts_merge_matches_single_pass() {
        let docs = [gram(&["a", "b", "a"]), gram(&["b", "a", "c"]), gram(&["a"])];
        let mut whole = NgramCounts::new(3);
        docs.iter().for_each(|d| whole.observe(d));
        let mut left = NgramCounts::new(3);
        left.observe(&docs[0]);
        let mut right = NgramCounts::new(3);
        right.observe(&docs[1]);
        right.observe(&docs[2]);
        right.merge(left);
        assert_eq!(right, whole);
        assert_eq!(whole.get(&gram(&["b", "a"])), 2);
    }
}
