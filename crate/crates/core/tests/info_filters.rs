use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumopt_core::info::{entropy_reduction_bits, RetentionTally};
use sumopt_core::{
    accumulate_distribution, filter_benchmark, filter_by_side, shannon_entropy, CorpusRecord, EntropyReport,
    FilterConfig, Language, TokenDistribution,
};

fn dist(counts: &[u64]) -> TokenDistribution {
    TokenDistribution::from_counts(counts.iter().enumerate().map(|(i, &c)| (format!("t{i}"), c)))
}

#[test]
fn analytic_entropies() {
    let abc = TokenDistribution::from_counts([("a", 2), ("b", 1), ("c", 1)]);
    assert!((shannon_entropy(&abc).unwrap().entropy_bits - 1.5).abs() < 1e-9);
    assert!((shannon_entropy(&dist(&[5; 8])).unwrap().entropy_bits - 3.0).abs() < 1e-9);
    assert_eq!(shannon_entropy(&dist(&[9])).unwrap().entropy_bits, 0.0);
}

#[test]
fn reduction_arithmetic() {
    assert!((entropy_reduction_bits(2.735, 4.095).unwrap() - 33.21).abs() < 0.01);
    assert!((entropy_reduction_bits(3.241, 4.448).unwrap() - 27.14).abs() < 0.01);
    assert!((entropy_reduction_bits(3.482, 4.448).unwrap() - 21.72).abs() < 0.01);
    let higher = EntropyReport::from_bits(5.0, 40).against(&EntropyReport::from_bits(4.0, 30)).unwrap();
    assert!(higher.entropy_reduction_pct.unwrap() < 0.0);
}

#[test]
fn pooled_not_macro_averaged() {
    let mut t = RetentionTally::default();
    t.observe_counts(10, 5);
    t.observe_counts(30, 5);
    assert_eq!(t.retention().unwrap(), 0.25);
}

proptest! {
    #[test]
    fn entropy_bounds(counts in prop::collection::vec(1u64..50, 1..40)) {
        let h = shannon_entropy(&dist(&counts)).unwrap().entropy_bits;
        let v = counts.len() as f64;
        prop_assert!(h >= 0.0);
        prop_assert!(h <= v.log2() + 1e-9);
        if counts.iter().all(|&c| c == counts[0]) {
            prop_assert!((h - v.log2()).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_is_permutation_invariant(mut counts in prop::collection::vec(1u64..50, 1..30), seed in any::<u64>()) {
        let before = shannon_entropy(&dist(&counts)).unwrap().entropy_bits;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..counts.len()).rev() {
            counts.swap(i, rng.gen_range(0..=i));
        }
        prop_assert_eq!(before, shannon_entropy(&dist(&counts)).unwrap().entropy_bits);
    }

    #[test]
    fn merge_homomorphism(
        a in prop::collection::vec(prop::collection::vec("[a-e]", 0..10), 0..5),
        b in prop::collection::vec(prop::collection::vec("[a-e]", 0..10), 0..5),
    ) {
        let whole = accumulate_distribution(a.iter().chain(b.iter()));
        let mut left = accumulate_distribution(a.iter());
        let right = accumulate_distribution(b.iter());
        let mut right_first = right.clone();
        right_first.merge(left.clone());
        left.merge(right);
        prop_assert_eq!(&left, &whole);
        prop_assert_eq!(&right_first, &whole);
        if whole.total() > 0 {
            prop_assert_eq!(shannon_entropy(&left).unwrap(), shannon_entropy(&whole).unwrap());
        }
    }
}

fn code_of(n: usize) -> String {
    vec!["x"; n].join(" ")
}

#[test]
fn benchmark_boundaries() {
    let cfg = FilterConfig::default();
    let summary = "one two three four";
    let records: Vec<CorpusRecord> = [19, 20, 200, 201]
        .iter()
        .map(|&n| CorpusRecord::new(n.to_string(), Language::Java, code_of(n), summary))
        .collect();
    let kept: Vec<String> = filter_benchmark(records, &cfg).unwrap().map(|r| r.id).collect();
    assert_eq!(kept, ["20", "200"]);

    let short = CorpusRecord::new("3", Language::Java, code_of(20), "one two three");
    let long = CorpusRecord::new("4", Language::Java, code_of(20), "one two three four");
    let kept: Vec<String> = filter_benchmark(vec![short, long], &cfg).unwrap().map(|r| r.id).collect();
    assert_eq!(kept, ["4"]);
}

#[test]
fn side_filter_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let records: Vec<CorpusRecord> = (0..200)
            .map(|i| {
                let score = match rng.gen_range(0..4) {
                    0 => 0.9,
                    _ => (rng.gen_range(0..=1000) as f64) / 1000.0,
                };
                CorpusRecord::new(i.to_string(), Language::Python, "x", "s").with_side_score(score)
            })
            .collect();
        let expected: Vec<String> =
            records.iter().filter(|r| r.side_score.unwrap() >= 0.9).map(|r| r.id.clone()).collect();
        let got: Vec<String> = filter_by_side(records.clone(), 0.9).unwrap().map(|r| r.unwrap().id).collect();
        assert_eq!(got, expected);
        let again: Vec<String> = filter_by_side(records.into_iter().filter(|r| got.contains(&r.id)), 0.9)
            .unwrap()
            .map(|r| r.unwrap().id)
            .collect();
        assert_eq!(again, got);
    }
}

proptest! {
    #[test]
    fn side_threshold_monotone(scores in prop::collection::vec(0.0f64..=1.0, 0..50), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let records: Vec<CorpusRecord> = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| CorpusRecord::new(i.to_string(), Language::Java, "x", "s").with_side_score(s))
            .collect();
        let ids = |tau| -> Vec<String> { filter_by_side(records.clone(), tau).unwrap().map(|r| r.unwrap().id).collect() };
        let loose = ids(lo);
        prop_assert!(ids(hi).iter().all(|id| loose.contains(id)));
        prop_assert_eq!(ids(0.0).len(), records.len());
    }

    #[test]
    fn benchmark_filter_is_idempotent(
        lens in prop::collection::vec(15usize..30, 0..20),
        summaries in prop::collection::vec("[a-z]{1,4}( [a-z]{1,4}){0,6}(\\. [a-z ]{0,10})?", 20),
    ) {
        let cfg = FilterConfig { max_code_tokens: 25, ..FilterConfig::default() };
        let records: Vec<CorpusRecord> = lens
            .iter()
            .zip(&summaries)
            .enumerate()
            .map(|(i, (&n, s))| CorpusRecord::new(i.to_string(), Language::Java, code_of(n), s.as_str()))
            .collect();
        let once: Vec<CorpusRecord> = filter_benchmark(records, &cfg).unwrap().collect();
        let twice: Vec<CorpusRecord> = filter_benchmark(once.clone(), &cfg).unwrap().collect();
        prop_assert_eq!(once, twice);
    }
}
