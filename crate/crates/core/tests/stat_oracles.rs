use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumopt_core::metrics::{Metric, PairedMetricSamples};
use sumopt_core::stats::{
    cliffs_delta, compare_systems, holm_bonferroni, render_p, wilcoxon_signed_rank, CompareConfig, Comparison,
    Magnitude, WilcoxonMode,
};

/// Two-sided exact p by enumerating all 2^n sign assignments over midranks.
fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let mags: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks: Vec<f64> = mags
        .iter()
        .map(|m| {
            let less = mags.iter().filter(|x| *x < m).count() as f64;
            let equal = mags.iter().filter(|x| *x == m).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let centre = total / 2.0;
    let observed: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let dev = (observed - centre).abs();
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let t: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        if (t - centre).abs() >= dev - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

fn brute_cliffs(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0i64;
    for x in a {
        for y in b {
            s += (x > y) as i64 - (x < y) as i64;
        }
    }
    s as f64 / (a.len() * b.len()) as f64
}

#[test]
fn wilcoxon_uniform_shift() {
    let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let b = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    let p = wilcoxon_signed_rank(&a, &b, WilcoxonMode::ExactSmallN).unwrap().p_value;
    assert!((p - 0.03125).abs() < 1e-12);
    assert!((enumerate_p(&a, &b) - 0.03125).abs() < 1e-12);
    let q = wilcoxon_signed_rank(&b, &a, WilcoxonMode::ExactSmallN).unwrap().p_value;
    assert_eq!(p, q);
}

#[test]
fn holm_worked_example() {
    let adj = holm_bonferroni(&[0.01, 0.02, 0.03]).unwrap();
    for (x, e) in adj.iter().zip([0.03, 0.04, 0.04]) {
        assert!((x - e).abs() < 1e-12);
    }
    assert_eq!(holm_bonferroni(&[0.2]).unwrap(), vec![0.2]);
}

#[test]
fn cliffs_band_edges() {
    for (d, m) in [
        (0.0, Magnitude::Negligible),
        (0.146_999, Magnitude::Negligible),
        (0.147, Magnitude::Small),
        (0.329_999, Magnitude::Small),
        (0.33, Magnitude::Medium),
        (0.473_999, Magnitude::Medium),
        (0.474, Magnitude::Large),
        (-0.729, Magnitude::Large),
        (-1.0, Magnitude::Large),
    ] {
        assert_eq!(Magnitude::of(d), m, "{d}");
    }
    assert_eq!(cliffs_delta(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap().delta, 0.0);
}

#[test]
fn exact_and_normal_agree_at_twenty() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = a.iter().map(|x| x + rng.gen_range(-0.5..0.45)).collect();
        let exact = wilcoxon_signed_rank(&a, &b, WilcoxonMode::ExactSmallN).unwrap();
        let normal = wilcoxon_signed_rank(&a, &b, WilcoxonMode::NormalApprox).unwrap();
        assert!(exact.exact && !normal.exact);
        worst = worst.max((exact.p_value - normal.p_value).abs());
    }
    assert!(worst <= 0.01, "max |exact - normal| = {worst}");
}

#[test]
fn family_with_one_strong_effect() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut family = Vec::new();
    for i in 0..9 {
        let b: Vec<f64> = (0..30).map(|_| rng.gen_range(0.0..1.0)).collect();
        let a: Vec<f64> = if i == 4 {
            b.iter().map(|x| x + 0.5).collect()
        } else {
            // tiny symmetric jitter: no systematic effect
            b.iter().enumerate().map(|(j, x)| if j % 2 == 0 { x + 1e-3 } else { x - 1e-3 }).collect()
        };
        family
            .push(Comparison { id: format!("m{i}"), samples: PairedMetricSamples::new(Metric::RougeL, a, b).unwrap() });
    }
    let reports = compare_systems(&family, &CompareConfig::default()).unwrap();
    let significant: Vec<&str> = reports.iter().filter(|r| r.significant).map(|r| r.comparison_id.as_str()).collect();
    assert_eq!(significant, ["m4"]);
    for r in &reports {
        assert!(r.adjusted_p >= r.raw_p && r.adjusted_p <= 1.0);
        if r.comparison_id != "m4" {
            assert_eq!(render_p(r.adjusted_p, 0.05), "x");
        }
    }
}

proptest! {
    #[test]
    fn exact_wilcoxon_equals_enumeration(
        pairs in prop::collection::vec((0i32..6, 0i32..6), 1..13),
    ) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let got = wilcoxon_signed_rank(&a, &b, WilcoxonMode::ExactSmallN).unwrap();
        prop_assert!((got.p_value - enumerate_p(&a, &b)).abs() < 1e-12);
        let swapped = wilcoxon_signed_rank(&b, &a, WilcoxonMode::ExactSmallN).unwrap();
        prop_assert_eq!(got.p_value, swapped.p_value);
        prop_assert!(got.p_value > 0.0 && got.p_value <= 1.0);
    }

    #[test]
    fn cliffs_matches_brute_force(
        a in prop::collection::vec(-5i32..5, 1..20),
        b in prop::collection::vec(-5i32..5, 1..20),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let d = cliffs_delta(&a, &b).unwrap().delta;
        prop_assert!((d - brute_cliffs(&a, &b)).abs() < 1e-12);
        prop_assert!((d + cliffs_delta(&b, &a).unwrap().delta).abs() < 1e-12);
        // strictly monotone transform of both samples
        let fa: Vec<f64> = a.iter().map(|x| x.powi(3) + 2.0 * x).collect();
        let fb: Vec<f64> = b.iter().map(|x| x.powi(3) + 2.0 * x).collect();
        prop_assert!((cliffs_delta(&fa, &fb).unwrap().delta - d).abs() < 1e-12);
    }

    #[test]
    fn holm_properties(ps in prop::collection::vec(0.0f64..=1.0, 1..15)) {
        let adj = holm_bonferroni(&ps).unwrap();
        let mut order: Vec<usize> = (0..ps.len()).collect();
        order.sort_by(|&i, &j| ps[i].total_cmp(&ps[j]));
        for w in order.windows(2) {
            prop_assert!(adj[w[0]] <= adj[w[1]]);
        }
        for (p, q) in ps.iter().zip(&adj) {
            prop_assert!(q >= p && *q <= 1.0);
        }
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                if ps[i] == ps[j] {
                    prop_assert_eq!(adj[i], adj[j]);
                }
            }
        }
    }
}
