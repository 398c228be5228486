use alloc::string::String;
use alloc::vec::Vec;

use super::{cliffs_delta, holm_bonferroni, wilcoxon_signed_rank, EffectSize, StatsError, WilcoxonMode};
use crate::metrics::{Metric, PairedMetricSamples};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Correction {
    #[default]
    Holm,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    pub alpha: f64,
    pub correction: Correction,
    pub mode: WilcoxonMode,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { alpha: 0.05, correction: Correction::Holm, mode: WilcoxonMode::ExactSmallN }
    }
}

/// One member of a comparison family.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub id: String,
    pub samples: PairedMetricSamples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub comparison_id: String,
    pub metric: Metric,
    pub raw_p: f64,
    pub adjusted_p: f64,
    /// Cliff's delta of system A against system B.
    pub effect: EffectSize,
    /// Pairs entering the signed-rank test (zero differences dropped).
    pub n_pairs: usize,
    pub n_total: usize,
    pub significant: bool,
}

/// Runs the signed-rank test and Cliff's delta on every comparison, then
/// adjusts the p-values across the whole family.
pub fn compare_systems(family: &[Comparison], cfg: &CompareConfig) -> Result<Vec<TestReport>, StatsError> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(cfg.alpha));
    }
    let mut reports = Vec::with_capacity(family.len());
    for c in family {
        let s = &c.samples;
        let w = wilcoxon_signed_rank(&s.system_a, &s.system_b, cfg.mode)?;
        let effect = cliffs_delta(&s.system_a, &s.system_b)?;
        reports.push(TestReport {
            comparison_id: c.id.clone(),
            metric: s.metric,
            raw_p: w.p_value,
            adjusted_p: w.p_value,
            effect,
            n_pairs: w.n_used,
            n_total: s.len(),
            significant: false,
        });
    }
    if cfg.correction == Correction::Holm {
        let raw: Vec<f64> = reports.iter().map(|r| r.raw_p).collect();
        for (r, adj) in reports.iter_mut().zip(holm_bonferroni(&raw)?) {
            r.adjusted_p = adj;
        }
    }
    for r in &mut reports {
        r.significant = r.adjusted_p < cfg.alpha;
    }
    Ok(reports)
}

/// Table rendering of a p-value: `x` when not significant at `alpha`,
/// `<0.001` and `<0.005` buckets, otherwise three decimals.
pub fn render_p(p: f64, alpha: f64) -> String {
    if p >= alpha {
        String::from("x")
    } else if p < 0.001 {
        String::from("<0.001")
    } else if p < 0.005 {
        String::from("<0.005")
    } else {
        alloc::format!("{p:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Magnitude;
    use alloc::vec;

    fn cmp(id: &str, a: Vec<f64>, b: Vec<f64>) -> Comparison {
        Comparison { id: id.into(), samples: PairedMetricSamples::new(Metric::Bleu, a, b).unwrap() }
    }

    #[test]
    fn identical_family() {
        let fam: Vec<Comparison> =
            (0..9).map(|i| cmp(&alloc::format!("c{i}"), vec![0.1, 0.2], vec![0.1, 0.2])).collect();
        let reports = compare_systems(&fam, &CompareConfig::default()).unwrap();
        for r in reports {
            assert_eq!(r.raw_p, 1.0);
            assert_eq!(r.adjusted_p, 1.0);
            assert_eq!(r.effect.delta, 0.0);
            assert_eq!(r.effect.magnitude, Magnitude::Negligible);
            assert_eq!(render_p(r.adjusted_p, 0.05), "x");
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(render_p(0.0004, 0.05), "<0.001");
        assert_eq!(render_p(0.003, 0.05), "<0.005");
        assert_eq!(render_p(0.0312, 0.05), "0.031");
        assert_eq!(render_p(0.05, 0.05), "x");
    }

    #[test]
    fn alpha_validation() {
        let cfg = CompareConfig { alpha: 0.0, ..CompareConfig::default() };
        assert_eq!(compare_systems(&[], &cfg), Err(StatsError::InvalidAlpha(0.0)));
    }
}
