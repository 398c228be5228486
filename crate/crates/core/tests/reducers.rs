mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use sumopt_core::reduce::{reduce, reduce_ast_with, NgramCounts};
use sumopt_core::{
    build_ban_list, lex_code, reduce_ast, reduce_crystalbleu, reduce_signature, CorpusRecord, Language, NgramBanList,
    ReduceError,
};

use common::{JAVA_FORMAT, PY_ERR_INDICES};

fn record(language: Language, code: &str) -> CorpusRecord {
    CorpusRecord::new("r", language, code, "summary")
}

fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

#[test]
fn java_signature_golden() {
    let out = reduce_signature(&record(Language::Java, JAVA_FORMAT)).unwrap();
    assert_eq!(out.reduced_tokens.tokens(), ["public", "String", "format", "(", "LoggingEvent", "event", ")"]);
}

#[test]
fn python_signature_golden() {
    let out = reduce_signature(&record(Language::Python, PY_ERR_INDICES)).unwrap();
    assert_eq!(out.reduced_tokens.tokens(), ["def", "_get_err_indices", "(", "self", ",", "coord_name", ")", ":"]);
}

#[test]
fn java_ast_golden_ends() {
    let out = reduce_ast(&record(Language::Java, JAVA_FORMAT)).unwrap();
    let t = out.reduced_tokens.tokens();
    assert_eq!(&t[..2], ["MethodDeclaration_format", "ReferenceType_String"]);
    assert_eq!(&t[t.len() - 2..], ["ReturnStatement", "MethodInvocation"]);
}

#[test]
fn python_ast_golden_ends() {
    let out = reduce_ast(&record(Language::Python, PY_ERR_INDICES)).unwrap();
    let t = out.reduced_tokens.tokens();
    assert_eq!(&t[..2], ["Module", "FunctionDef"]);
    assert_eq!(&t[t.len() - 5..], ["BinOp", "Name", "Name", "Return", "Name"]);
    let fused = reduce_ast_with(&record(Language::Python, PY_ERR_INDICES), true).unwrap();
    assert_eq!(fused.reduced_tokens.tokens()[1], "FunctionDef__get_err_indices");
}

#[test]
fn empty_python_module() {
    let out = reduce_ast(&record(Language::Python, "")).unwrap();
    assert_eq!(out.reduced_tokens.tokens(), ["Module"]);
}

#[test]
fn parse_failure_is_an_error() {
    let err = reduce_ast(&record(Language::Java, "public void f( {")).unwrap_err();
    assert!(matches!(err, ReduceError::ParseFailure { .. }));
    let err = reduce_ast(&record(Language::Python, "def f(:\n  pass")).unwrap_err();
    assert!(matches!(err, ReduceError::ParseFailure { .. }));
}

#[test]
fn identity_under_empty_ban_list() {
    let ban = NgramBanList::empty(4, 500).unwrap();
    let r = record(Language::Java, JAVA_FORMAT);
    let out = reduce_crystalbleu(&r, &ban).unwrap();
    assert_eq!(out.reduced_tokens.tokens(), lex_code(JAVA_FORMAT, Language::Java).tokens());
    assert_eq!(out.token_retention, 1.0);
}

#[test]
fn ban_list_matches_brute_force_count() {
    let codes = ["a b a c", "b b a", "c a b a", "d"];
    let records: Vec<CorpusRecord> =
        codes.iter().enumerate().map(|(i, c)| CorpusRecord::new(i.to_string(), Language::Java, *c, "s")).collect();
    let k = 2;
    let ban = build_ban_list(&records, k, 3).unwrap();
    for n in 1..=3 {
        let mut counts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
        for c in codes {
            let toks: Vec<String> = c.split(' ').map(String::from).collect();
            for w in toks.windows(n) {
                *counts.entry(w.to_vec()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(Vec<String>, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        let got: Vec<(Vec<String>, u64)> =
            ban.entries().iter().filter(|(g, _)| g.len() == n).map(|(g, f)| (g.clone(), *f)).collect();
        let mut expected = ranked;
        expected.sort();
        assert_eq!(got, expected, "order {n}");
    }
}

#[test]
fn permuted_corpus_changes_only_the_fingerprint() {
    let a = CorpusRecord::new("1", Language::Java, "int f ( ) { return 1 ; }", "s");
    let b = CorpusRecord::new("2", Language::Java, "void g ( ) { }", "s");
    let one = build_ban_list([&a, &b], 3, 2).unwrap();
    let two = build_ban_list([&b, &a], 3, 2).unwrap();
    assert_eq!(one.entries(), two.entries());
    assert_ne!(one.source_fingerprint(), two.source_fingerprint());
}

#[test]
fn ast_retention_may_exceed_one() {
    let r = record(Language::Python, "x");
    let out = reduce(&r, sumopt_core::Strategy::Ast, None).unwrap();
    assert_eq!(out.reduced_tokens.tokens(), ["Module", "Expr", "Name"]);
    assert!(out.exceeds_input());
    assert_eq!(out.token_retention, 3.0);
}

fn vocab_token() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "c", "d", "(", ")", "{", "}", ";", "return", "public", "x1"])
        .prop_map(String::from)
}

fn ban_from(grams: Vec<Vec<String>>, max_n: usize) -> NgramBanList {
    let mut entries = BTreeMap::new();
    for g in grams {
        if !g.is_empty() && g.len() <= max_n {
            entries.insert(g, 1);
        }
    }
    let k = entries.len().max(1);
    NgramBanList::from_parts(max_n, k, entries, String::new()).unwrap()
}

proptest! {
    #[test]
    fn crystalbleu_output_is_subsequence_with_coverage(
        tokens in prop::collection::vec(vocab_token(), 1..40),
        grams in prop::collection::vec(prop::collection::vec(vocab_token(), 1..4), 0..6),
    ) {
        let code = tokens.join(" ");
        let ban = ban_from(grams, 3);
        let input = lex_code(&code, Language::Java);
        let r = record(Language::Java, &code);
        let kept = match reduce_crystalbleu(&r, &ban) {
            Ok(o) => o.reduced_tokens.into_tokens(),
            Err(ReduceError::EmptyAfterReduction(o)) => o.reduced_tokens.clone().into_tokens(),
            Err(e) => panic!("{e}"),
        };
        prop_assert!(is_subsequence(&kept, input.tokens()));
        // independent coverage oracle
        let t = input.tokens();
        let mut covered = vec![false; t.len()];
        for g in ban.entries().keys() {
            for i in 0..t.len() {
                if i + g.len() <= t.len() && t[i..i + g.len()] == g[..] {
                    for c in &mut covered[i..i + g.len()] { *c = true; }
                }
            }
        }
        let expected: Vec<String> = t.iter().zip(&covered).filter(|(_, c)| !**c).map(|(s, _)| s.clone()).collect();
        prop_assert_eq!(kept, expected);
    }

    #[test]
    fn larger_ban_list_never_keeps_more(
        tokens in prop::collection::vec(vocab_token(), 1..30),
        grams in prop::collection::vec(prop::collection::vec(vocab_token(), 1..4), 0..6),
        extra in prop::collection::vec(prop::collection::vec(vocab_token(), 1..4), 0..4),
    ) {
        let code = tokens.join(" ");
        let r = record(Language::Java, &code);
        let small = ban_from(grams.clone(), 3);
        let mut all = grams;
        all.extend(extra);
        let big = ban_from(all, 3);
        let count = |b: &NgramBanList| match reduce_crystalbleu(&r, b) {
            Ok(o) => o.output_token_count,
            Err(ReduceError::EmptyAfterReduction(_)) => 0,
            Err(e) => panic!("{e}"),
        };
        prop_assert!(count(&big) <= count(&small));
    }

    #[test]
    fn counts_merge_is_order_independent(
        docs in prop::collection::vec(prop::collection::vec(vocab_token(), 0..12), 1..6),
    ) {
        let mut forward = NgramCounts::new(3);
        for d in &docs { forward.observe(d); }
        let mut backward = NgramCounts::new(3);
        for d in docs.iter().rev() {
            let mut shard = NgramCounts::new(3);
            shard.observe(d);
            backward.merge(shard);
        }
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn signature_is_contiguous_subsequence(
        name in "[a-z][a-zA-Z0-9]{0,8}",
        params in prop::collection::vec(("[A-Z][a-z]{0,5}", "[a-z][a-z0-9]{0,5}"), 0..4),
    ) {
        const RESERVED: &[&str] = &["do", "if", "for", "int", "new", "try", "byte", "case", "char", "else", "enum", "goto", "long", "null", "this", "true", "void", "break", "catch", "class", "const", "final", "float", "short", "super", "throw", "while", "false", "double", "import", "native", "public", "return", "static", "switch", "throws", "assert", "boolean", "default", "extends", "finally", "package", "private", "abstract", "continue", "strictfp", "volatile", "interface", "protected", "transient", "implements", "instanceof", "synchronized"];
        prop_assume!(!RESERVED.contains(&name.as_str()));
        prop_assume!(params.iter().all(|(_, n)| !RESERVED.contains(&n.as_str())));
        let plist: Vec<String> = params.iter().map(|(t, n)| format!("{t} {n}")).collect();
        let code = format!("@Deprecated\npublic static int {name}({}) throws Exception {{ return 0; }}", plist.join(", "));
        let r = record(Language::Java, &code);
        let out = reduce_signature(&r).unwrap();
        let input = lex_code(&code, Language::Java);
        let toks = out.reduced_tokens.tokens();
        let start = input.tokens().iter().position(|t| t == "public").unwrap();
        prop_assert_eq!(&input.tokens()[start..start + toks.len()], toks);
        prop_assert_eq!(toks.last().map(String::as_str), Some(")"));
        prop_assert!(out.token_retention <= 1.0);
    }
}
