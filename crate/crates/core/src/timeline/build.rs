use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use rayon::prelude::*;
use serde::Serialize;

use super::{build_timeline, map_concept, MappingMode, MappingTable, StopWords, TimelineBuild, TimelineError};
use crate::corpus::Corpus;
use crate::events::EventStore;
use crate::relatedness::ExpansionConfig;
use crate::scalar::Scalar;
use crate::stats::{Catalog, Indicator};

pub const REPORT_HEADER: &str = "indicator_id,keyword_count,event_count";
pub const REPORT_SUMMARY_ID: &str = "average";
pub const TIMELINES_DIR: &str = "timelines";
pub const REPORT_FILE: &str = "report.csv";
pub const SKIPPED_FILE: &str = "skipped.tsv";
pub const EXPANSIONS_FILE: &str = "expansions.jsonl";

const FILENAME_SAFE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.');

#[derive(Debug, Clone)]
pub struct BuildOptions<T> {
    pub mode: MappingMode,
    pub config: ExpansionConfig<T>,
    pub stop_words: StopWords,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub indicator_id: String,
    /// Expansion keywords above threshold (the mapped concept not counted).
    pub keyword_count: usize,
    pub event_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub indicator_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<Skipped>,
    pub mean_keywords: f64,
    pub mean_events: f64,
}

impl RunReport {
    fn new(rows: Vec<ReportRow>, skipped: Vec<Skipped>) -> Self {
        let mean = |f: fn(&ReportRow) -> usize| {
            if rows.is_empty() {
                0.0
            } else {
                rows.iter().map(f).sum::<usize>() as f64 / rows.len() as f64
            }
        };
        let mean_keywords = mean(|r| r.keyword_count);
        let mean_events = mean(|r| r.event_count);
        RunReport { rows, skipped, mean_keywords, mean_events }
    }

    /// Per-indicator rows followed by an `average` row (three decimals).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", csv_field(&row.indicator_id), row.keyword_count, row.event_count));
        }
        out.push_str(&format!("{REPORT_SUMMARY_ID},{:.3},{:.3}\n", self.mean_keywords, self.mean_events));
        out
    }

    pub fn skipped_tsv(&self) -> String {
        let mut out = String::from("indicator_id\treason\n");
        for s in &self.skipped {
            out.push_str(&format!("{}\t{}\n", s.indicator_id, s.reason.replace(['\t', '\n'], " ")));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// File name for an indicator's timeline document.
pub fn timeline_file_name(indicator_id: &str) -> String {
    format!("{}.json", utf8_percent_encode(indicator_id, FILENAME_SAFE))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> TimelineError + '_ {
    move |e| TimelineError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Build one timeline per mapped indicator and persist them with a run
/// report under `options.out_dir`:
///
/// * `timelines/<indicator_id>.json`
/// * `report.csv`, `skipped.tsv` (unmapped or failed indicators)
/// * `expansions.jsonl` (scored keywords with hit counts)
///
/// Everything is staged in a scratch directory first; on an I/O failure
/// the scratch directory is removed and earlier outputs are left alone.
pub fn build_all<V: Scalar, T: Scalar, C: Corpus + ?Sized>(
    catalog: &Catalog<V>,
    mappings: &MappingTable,
    corpus: &C,
    events: &EventStore,
    options: &BuildOptions<T>,
) -> Result<RunReport, TimelineError> {
    let mut indicators: Vec<&Indicator> = catalog.indicators().iter().collect();
    indicators.sort_by(|a, b| a.id.cmp(&b.id));

    let outcomes: Vec<Result<TimelineBuild<T>, Skipped>> = indicators
        .par_iter()
        .map(|indicator| {
            let skip = |e: TimelineError| Skipped { indicator_id: indicator.id.clone(), reason: e.to_string() };
            let mapping = map_concept(indicator, mappings, options.mode, corpus, &options.stop_words).map_err(skip)?;
            build_timeline(indicator, &mapping, &options.config, corpus, events).map_err(skip)
        })
        .collect();

    let mut built = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(b) => built.push(b),
            Err(s) => skipped.push(s),
        }
    }
    let rows = built
        .iter()
        .map(|b| ReportRow {
            indicator_id: b.doc.indicator_id.clone(),
            keyword_count: b.expansion.keywords.len(),
            event_count: b.doc.events.len(),
        })
        .collect();
    let report = RunReport::new(rows, skipped);

    let out_dir = &options.out_dir;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let staging = out_dir.join(".build-staging");
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(io_err(&staging))?;
    }
    match write_outputs(&staging, &built, &report).and_then(|()| promote(&staging, out_dir)) {
        Ok(()) => {
            let _ = fs::remove_dir_all(&staging);
            Ok(report)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            Err(e)
        }
    }
}

fn write_outputs<T: Scalar>(
    staging: &Path,
    built: &[TimelineBuild<T>],
    report: &RunReport,
) -> Result<(), TimelineError> {
    let timelines = staging.join(TIMELINES_DIR);
    fs::create_dir_all(&timelines).map_err(io_err(&timelines))?;
    for b in built {
        let path = timelines.join(timeline_file_name(&b.doc.indicator_id));
        fs::write(&path, b.doc.to_json()).map_err(io_err(&path))?;
    }
    let path = staging.join(REPORT_FILE);
    fs::write(&path, report.to_csv()).map_err(io_err(&path))?;
    let path = staging.join(SKIPPED_FILE);
    fs::write(&path, report.skipped_tsv()).map_err(io_err(&path))?;
    let path = staging.join(EXPANSIONS_FILE);
    let mut out = std::io::BufWriter::new(fs::File::create(&path).map_err(io_err(&path))?);
    for b in built {
        b.expansion.write_jsonl(&mut out).map_err(io_err(&path))?;
    }
    out.flush().map_err(io_err(&path))?;
    Ok(())
}

fn promote(staging: &Path, out_dir: &Path) -> Result<(), TimelineError> {
    for name in [TIMELINES_DIR, REPORT_FILE, SKIPPED_FILE, EXPANSIONS_FILE] {
        let target = out_dir.join(name);
        if target.is_dir() {
            fs::remove_dir_all(&target).map_err(io_err(&target))?;
        } else if target.exists() {
            fs::remove_file(&target).map_err(io_err(&target))?;
        }
        fs::rename(staging.join(name), &target).map_err(io_err(&target))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_csv_layout() {
        let report = RunReport::new(
            vec![
                ReportRow { indicator_id: "a".into(), keyword_count: 3, event_count: 10 },
                ReportRow { indicator_id: "b,c".into(), keyword_count: 4, event_count: 1 },
            ],
            vec![Skipped { indicator_id: "z".into(), reason: "no\tmapping".into() }],
        );
        assert_eq!(
            report.to_csv(),
            "indicator_id,keyword_count,event_count\na,3,10\n\"b,c\",4,1\naverage,3.500,5.500\n"
        );
        assert_eq!(report.skipped_tsv(), "indicator_id\treason\nz\tno mapping\n");
        let empty = RunReport::new(vec![], vec![]);
        assert!(empty.to_csv().ends_with("average,0.000,0.000\n"));
    }

    #[test]
    fn file_names_are_safe() {
        assert_eq!(timeline_file_name("tfr"), "tfr.json");
        assert_eq!(timeline_file_name("a/b c"), "a%2Fb%20c.json");
    }
}
