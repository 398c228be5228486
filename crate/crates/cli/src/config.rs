//! Run configuration: command-line flags, optional JSON config file, and the
//! echo stored in every report.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sumopt_core::metrics::Metric;
use sumopt_core::stats::Correction;
use sumopt_core::{FilterConfig, Language, Strategy};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyChoice {
    Ast,
    Signature,
    Crystalbleu,
    #[default]
    None,
}

impl StrategyChoice {
    pub fn strategy(self) -> Strategy {
        match self {
            StrategyChoice::Ast => Strategy::Ast,
            StrategyChoice::Signature => Strategy::Signature,
            StrategyChoice::Crystalbleu => Strategy::CrystalBleu,
            StrategyChoice::None => Strategy::Original,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionChoice {
    #[default]
    Holm,
    None,
}

impl From<CorrectionChoice> for Correction {
    fn from(c: CorrectionChoice) -> Self {
        match c {
            CorrectionChoice::Holm => Correction::Holm,
            CorrectionChoice::None => Correction::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Reduce,
    Filter,
    Stats,
    Eval,
    Compare,
    MineNgrams,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Reduce => "reduce",
            CommandKind::Filter => "filter",
            CommandKind::Stats => "stats",
            CommandKind::Eval => "eval",
            CommandKind::Compare => "compare",
            CommandKind::MineNgrams => "mine-ngrams",
        }
    }
}

/// Everything that determines a run's outputs.
///
/// Worker-thread count is deliberately absent: it never changes results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub language: Option<Language>,
    pub strategy: StrategyChoice,
    pub ban_list: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub k: usize,
    pub max_n: usize,
    pub side_threshold: Option<f64>,
    pub benchmark_filter: bool,
    pub min_code_tokens: usize,
    pub max_code_tokens: usize,
    pub min_summary_tokens: usize,
    pub first_sentence: bool,
    pub drop_empty: bool,
    pub metrics: Option<Vec<Metric>>,
    pub alpha: f64,
    pub correction: CorrectionChoice,
    pub candidates: Option<PathBuf>,
    pub references: Option<PathBuf>,
    pub scores_a: Option<PathBuf>,
    pub scores_b: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
    pub max_failures: Option<u64>,
    pub report: Option<PathBuf>,
    /// Reserved for sampling utilities; nothing in the pipeline samples.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let f = FilterConfig::default();
        PipelineConfig {
            input: None,
            output: None,
            language: None,
            strategy: StrategyChoice::None,
            ban_list: None,
            train: None,
            k: 500,
            max_n: 4,
            side_threshold: None,
            benchmark_filter: false,
            min_code_tokens: f.min_code_tokens,
            max_code_tokens: f.max_code_tokens,
            min_summary_tokens: f.min_summary_tokens,
            first_sentence: f.apply_first_sentence,
            drop_empty: false,
            metrics: None,
            alpha: 0.05,
            correction: CorrectionChoice::Holm,
            candidates: None,
            references: None,
            scores_a: None,
            scores_b: None,
            baseline: None,
            max_failures: None,
            report: None,
            seed: 0,
        }
    }
}

fn need<'a>(value: &'a Option<PathBuf>, flag: &str, cmd: CommandKind) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| CliError::config(format!("`{}` needs --{flag}", cmd.as_str())))
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Filter thresholds in the core library's form. The side threshold
    /// defaults to 0.9 when unset; callers check `side_threshold` to decide
    /// whether the side filter runs at all.
    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            side_threshold: self.side_threshold.unwrap_or(FilterConfig::default().side_threshold),
            min_code_tokens: self.min_code_tokens,
            max_code_tokens: self.max_code_tokens,
            min_summary_tokens: self.min_summary_tokens,
            apply_first_sentence: self.first_sentence,
        }
    }

    pub fn metrics_or_all(&self) -> Vec<Metric> {
        self.metrics.clone().unwrap_or_else(|| Metric::ALL.to_vec())
    }

    pub fn input(&self, cmd: CommandKind) -> Result<&Path, CliError> {
        need(&self.input, "input", cmd)
    }

    pub fn output(&self, cmd: CommandKind) -> Result<&Path, CliError> {
        need(&self.output, "output", cmd)
    }

    /// Checks the parts of the configuration `cmd` relies on.
    pub fn validate(&self, cmd: CommandKind) -> Result<(), CliError> {
        self.filter_config().validate().map_err(|e| CliError::config(e.to_string()))?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::config(format!("--alpha {} is outside (0, 1)", self.alpha)));
        }
        if self.k == 0 {
            return Err(CliError::config("--k must be at least 1"));
        }
        if !(1..=sumopt_core::reduce::MAX_NGRAM_ORDER).contains(&self.max_n) {
            return Err(CliError::config(format!(
                "--max-n {} is outside 1..={}",
                self.max_n,
                sumopt_core::reduce::MAX_NGRAM_ORDER
            )));
        }
        if let Some(m) = &self.metrics {
            if m.is_empty() {
                return Err(CliError::config("--metrics is empty"));
            }
        }
        let mut reads: Vec<&Path> = Vec::new();
        match cmd {
            CommandKind::Reduce => {
                reads.push(self.input(cmd)?);
                self.output(cmd)?;
                if self.strategy == StrategyChoice::Crystalbleu && self.ban_list.is_none() && self.train.is_none() {
                    return Err(CliError::config("--strategy crystalbleu needs --ban-list or --train"));
                }
                reads.extend(self.ban_list.as_deref());
                reads.extend(self.train.as_deref());
            }
            CommandKind::Filter => {
                reads.push(self.input(cmd)?);
                self.output(cmd)?;
            }
            CommandKind::Stats => {
                reads.push(self.input(cmd)?);
                reads.extend(self.baseline.as_deref());
            }
            CommandKind::Eval => {
                reads.push(need(&self.candidates, "candidates", cmd)?);
                reads.push(need(&self.references, "references", cmd)?);
            }
            CommandKind::Compare => {
                reads.push(need(&self.scores_a, "scores-a", cmd)?);
                reads.push(need(&self.scores_b, "scores-b", cmd)?);
            }
            CommandKind::MineNgrams => {
                reads.push(self.input(cmd).or_else(|_| need(&self.train, "train", cmd))?);
                self.output(cmd)?;
            }
        }
        for written in [self.output.as_deref(), self.report.as_deref()].into_iter().flatten() {
            if reads.contains(&written) {
                return Err(CliError::config(format!("{} is both read and written", written.display())));
            }
        }
        if self.output.is_some() && self.output == self.report {
            return Err(CliError::config("--output and --report name the same file"));
        }
        Ok(())
    }
}

fn parse_language(s: &str) -> Result<Language, String> {
    s.parse().map_err(|e: sumopt_core::RecordError| e.to_string())
}

/// Flags shared by every subcommand. Unset flags fall back to `--config`,
/// then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Input corpus (JSON lines).
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output file.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Language for records without a `language` field.
    #[arg(long, value_parser = parse_language, value_name = "java|python")]
    pub language: Option<Language>,
    /// Reduction strategy [default: none].
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyChoice>,
    /// Precomputed n-gram ban list.
    #[arg(long, value_name = "PATH")]
    pub ban_list: Option<PathBuf>,
    /// Training split to mine a ban list from when --ban-list is absent.
    #[arg(long, value_name = "PATH")]
    pub train: Option<PathBuf>,
    /// Banned n-grams per order [default: 500].
    #[arg(long)]
    pub k: Option<usize>,
    /// Largest banned n-gram order [default: 4].
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Keep records whose side_score is at least this value.
    #[arg(long)]
    pub side_threshold: Option<f64>,
    /// Apply benchmark curation bounds.
    #[arg(long)]
    pub benchmark_filter: bool,
    /// [default: 20]
    #[arg(long)]
    pub min_code_tokens: Option<usize>,
    /// [default: 200]
    #[arg(long)]
    pub max_code_tokens: Option<usize>,
    /// Summaries need strictly more tokens than this [default: 3].
    #[arg(long)]
    pub min_summary_tokens: Option<usize>,
    /// Comma-separated metrics [default: bleu,rouge-l,meteor,chrf,c-coeff].
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<Metric>>,
    /// Significance level [default: 0.05].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Multiple-comparison correction [default: holm].
    #[arg(long, value_enum)]
    pub correction: Option<CorrectionChoice>,
    /// Where to write the JSON run report (stdout when absent).
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Exit with status 3 when more records than this fail.
    #[arg(long)]
    pub max_failures: Option<u64>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Drop records whose reduction removed every token.
    #[arg(long)]
    pub drop_empty: bool,
    /// Candidate summaries for `eval`.
    #[arg(long, value_name = "PATH")]
    pub candidates: Option<PathBuf>,
    /// Reference summaries for `eval`.
    #[arg(long, value_name = "PATH")]
    pub references: Option<PathBuf>,
    /// Per-record scores of system A for `compare`.
    #[arg(long, value_name = "PATH")]
    pub scores_a: Option<PathBuf>,
    /// Per-record scores of system B for `compare`.
    #[arg(long, value_name = "PATH")]
    pub scores_b: Option<PathBuf>,
    /// Baseline corpus or token distribution for `stats`.
    #[arg(long, value_name = "PATH")]
    pub baseline: Option<PathBuf>,
    /// JSON configuration file; explicit flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

impl Opts {
    /// Layers the flags over the config file (if any) and the defaults.
    pub fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone().into(); })*
            };
        }
        take!(
            input,
            output,
            language,
            ban_list,
            train,
            side_threshold,
            candidates,
            references,
            scores_a,
            scores_b,
            baseline,
            report,
            max_failures,
            metrics
        );
        if let Some(v) = self.strategy {
            c.strategy = v;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.max_n {
            c.max_n = v;
        }
        if let Some(v) = self.min_code_tokens {
            c.min_code_tokens = v;
        }
        if let Some(v) = self.max_code_tokens {
            c.max_code_tokens = v;
        }
        if let Some(v) = self.min_summary_tokens {
            c.min_summary_tokens = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.correction {
            c.correction = v;
        }
        c.benchmark_filter |= self.benchmark_filter;
        c.drop_empty |= self.drop_empty;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let c = PipelineConfig {
            input: Some("in.jsonl".into()),
            strategy: StrategyChoice::Crystalbleu,
            metrics: Some(vec![Metric::Bleu, Metric::CCoeff]),
            side_threshold: Some(0.9),
            language: Some(Language::Python),
            ..PipelineConfig::default()
        };
        assert_eq!(PipelineConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn crystalbleu_needs_a_ban_list_source() {
        let mut c = PipelineConfig {
            input: Some("a".into()),
            output: Some("b".into()),
            strategy: StrategyChoice::Crystalbleu,
            ..PipelineConfig::default()
        };
        assert!(c.validate(CommandKind::Reduce).is_err());
        c.train = Some("t".into());
        assert!(c.validate(CommandKind::Reduce).is_ok());
    }

    #[test]
    fn write_collisions_are_rejected() {
        let c = PipelineConfig { input: Some("same".into()), output: Some("same".into()), ..PipelineConfig::default() };
        assert!(c.validate(CommandKind::Filter).is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(PipelineConfig::from_json(r#"{"stratgy":"ast"}"#).is_err());
    }
}
