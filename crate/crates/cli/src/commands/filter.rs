use std::time::Instant;

use sumopt_core::CorpusStats;

use super::{apply_filters, describe_filters, drive, record_store_error, Verdict};
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::report::RunReport;
use crate::store::{read_corpus_with, CorpusWriter};

pub(super) fn run(cfg: &PipelineConfig, report: &mut RunReport) -> Result<(), CliError> {
    let fcfg = cfg.filter_config();
    report.filters = describe_filters(cfg);
    if report.filters.is_empty() {
        report.notes.push("no filters configured; output equals input".into());
    }
    let start = Instant::now();
    let mut writer = CorpusWriter::create(cfg.output.as_deref().expect("validated"))?;
    let mut before = CorpusStats::default();
    let process = |record: sumopt_core::CorpusRecord| {
        let mut stats = CorpusStats::default();
        stats.observe(&record);
        let id = record.id.clone();
        (stats, id, apply_filters(record, cfg, &fcfg))
    };
    drive(read_corpus_with(cfg.input.as_deref().expect("validated"), cfg.language)?, process, |item| {
        let (stats, id, verdict) = match item {
            Ok(v) => v,
            Err(e) => {
                record_store_error(report, &e);
                return Ok(());
            }
        };
        report.counts.input += 1;
        before.merge(&stats);
        match verdict {
            Verdict::Keep(r) => {
                writer.write(&r)?;
                report.counts.output += 1;
            }
            Verdict::Drop => report.counts.filtered += 1,
            Verdict::Fail(reason) => {
                log::warn!("record {id}: {reason}");
                report.fail(Some(&id), None, reason);
            }
        }
        Ok(())
    })?;
    report.corpus_before = Some(before);
    report.corpus_after = Some(writer.finish()?);
    report.time("filter", start);
    Ok(())
}
