mod common;

use proptest::prelude::*;
use sumopt::store::{encode_record, CorpusWriter};
use sumopt::{read_corpus, write_corpus, StoreError};
use sumopt_core::{CorpusRecord, CorpusStats, Language, Strategy as Reduction};
use tempfile::tempdir;

fn line(id: &str) -> String {
    format!(r#"{{"id":"{id}","language":"java","code":"int {id};","summary":"s"}}"#)
}

#[test]
fn three_lines_in_order() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    common::write_lines(&p, ["a", "b", "c"].map(line));
    let ids: Vec<String> = read_corpus(&p).unwrap().map(|r| r.unwrap().id).collect();
    assert_eq!(ids, ["a", "b", "c"]);
}

#[test]
fn empty_file_is_an_empty_stream() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("empty.jsonl");
    std::fs::write(&p, "").unwrap();
    assert_eq!(read_corpus(&p).unwrap().count(), 0);
}

#[test]
fn malformed_line_carries_its_number() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    common::write_lines(&p, [line("a"), "{\"id\": \"b\", \"code\": ".to_string(), line("c")]);
    let items: Vec<_> = read_corpus(&p).unwrap().collect();
    assert_eq!(items.len(), 3);
    assert_eq!(items[0].as_ref().unwrap().id, "a");
    assert!(matches!(items[1], Err(StoreError::MalformedRecord { line: 2, .. })));
    assert_eq!(items[2].as_ref().unwrap().id, "c");
}

#[test]
fn missing_file() {
    assert!(matches!(read_corpus("/nonexistent/x.jsonl"), Err(StoreError::FileNotFound(_))));
}

#[test]
fn hundred_records_round_trip() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    let records = common::JavaGen::new(9).corpus(100);
    let stats = write_corpus(&records, &p).unwrap();
    assert_eq!(stats.record_count, 100);
    let back: Vec<CorpusRecord> = read_corpus(&p).unwrap().map(Result::unwrap).collect();
    assert_eq!(back, records);
}

#[test]
fn empty_sequence_writes_an_empty_file() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    let stats = write_corpus(Vec::<CorpusRecord>::new(), &p).unwrap();
    assert_eq!(stats, CorpusStats::default());
    assert_eq!(std::fs::read(&p).unwrap().len(), 0);
}

#[test]
fn embedded_newlines_are_escaped() {
    let code = "public int f() {\n    return 1;\n}\n";
    let r = CorpusRecord::new("m", Language::Java, code, "Returns one.\nAlways.");
    let encoded = encode_record(&r).unwrap();
    assert!(!encoded.contains('\n'));
    let dir = tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    write_corpus([&r], &p).unwrap();
    let back: Vec<CorpusRecord> = read_corpus(&p).unwrap().map(Result::unwrap).collect();
    assert_eq!(back, [r]);
}

#[test]
fn writer_counts_tokens() {
    let dir = tempdir().unwrap();
    let mut w = CorpusWriter::create(dir.path().join("c.jsonl")).unwrap();
    w.write(&CorpusRecord::new("1", Language::Java, "int x = 1;", "Sets x.")).unwrap();
    let stats = w.finish().unwrap();
    assert_eq!((stats.record_count, stats.total_code_tokens, stats.total_summary_tokens), (1, 5, 3));
}

fn arb_record() -> impl Strategy<Value = CorpusRecord> {
    (
        "[a-zA-Z0-9_-]{1,12}",
        prop::bool::ANY,
        "\\PC*[a-z]\\PC*",
        "\\PC{0,40}",
        prop::option::of(0.0f64..=1.0),
        prop::option::of((
            "\\PC{0,30}",
            prop::sample::select(vec![
                Reduction::Ast,
                Reduction::Signature,
                Reduction::CrystalBleu,
                Reduction::Original,
            ]),
        )),
        prop::collection::vec(
            ("x_[a-z]{1,6}", prop::sample::select(vec!["1", "\"v\"", "[1,2]", "{\"a\":null}", "true"])),
            0..3,
        ),
    )
        .prop_map(|(id, java, code, summary, score, reduction, extra)| {
            let mut r = CorpusRecord::new(id, if java { Language::Java } else { Language::Python }, code, summary);
            r.side_score = score;
            if let Some((text, s)) = reduction {
                r = r.with_reduction(s, text);
            }
            let mut seen = std::collections::BTreeSet::new();
            r.extra =
                extra.into_iter().filter(|(k, _)| seen.insert(k.clone())).map(|(k, v)| (k, v.to_string())).collect();
            r
        })
}

proptest! {
    #[test]
    fn records_round_trip(records in prop::collection::vec(arb_record(), 0..8)) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        write_corpus(&records, &p).unwrap();
        let back: Vec<CorpusRecord> = read_corpus(&p).unwrap().map(Result::unwrap).collect();
        prop_assert_eq!(back, records);
    }
}
