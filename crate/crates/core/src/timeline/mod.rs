//! Per-indicator event timelines.
//!
//! For each indicator: preprocess its title, map it to an article, expand
//! that article into related keywords, and collect the events that mention
//! any keyword within the indicator's year range. The result is a
//! [`TimelineDoc`] with per-keyword facet counts.

mod build;
mod mapping;
mod preprocess;

use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::events::{EventDate, EventError, EventLink, EventMatch, EventStore};
use crate::relatedness::{expand, Expansion, ExpansionConfig, RelatednessError};
use crate::scalar::Scalar;
use crate::stats::Indicator;

pub use build::{
    build_all, timeline_file_name, BuildOptions, ReportRow, RunReport, Skipped, EXPANSIONS_FILE, REPORT_FILE,
    REPORT_HEADER, REPORT_SUMMARY_ID, SKIPPED_FILE, TIMELINES_DIR,
};
pub use mapping::{map_concept, ConceptMapping, MappingMode, MappingTable, SEARCH_DEPTH};
pub use preprocess::{preprocess_title, StopWords};

/// Language of the events used for timelines.
pub const EVENT_LANG: &str = "en";

#[derive(Debug, thiserror::Error)]
pub enum TimelineError {
    #[error("title `{title}` is empty after preprocessing; map it manually")]
    Untitled { title: String },
    #[error("`{indicator_id}` is unmapped: {reason}")]
    Unmapped { indicator_id: String, reason: String },
    #[error("`{indicator_id}` failed at {stage}: {message}")]
    Stage { indicator_id: String, stage: &'static str, message: String },
    #[error("mappings line {line}: {message}")]
    Mappings { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineKeyword {
    pub label: String,
    pub sr: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub event_id: String,
    pub date: EventDate,
    pub description: String,
    pub matched_keywords: Vec<String>,
    pub links: Vec<EventLink>,
    pub thumbnail: Option<String>,
}

impl TimelineEvent {
    pub fn year(&self) -> i32 {
        self.date.year
    }
}

impl From<EventMatch> for TimelineEvent {
    fn from(m: EventMatch) -> Self {
        TimelineEvent {
            event_id: m.event.event_id,
            date: m.event.date,
            description: m.event.description,
            matched_keywords: m.matched_keywords,
            links: m.event.links,
            thumbnail: m.event.thumbnail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub keyword: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineDoc {
    pub indicator_id: String,
    pub concept: String,
    /// The mapped concept first, then expansions best first.
    pub keywords: Vec<TimelineKeyword>,
    pub events: Vec<TimelineEvent>,
    pub facets: Vec<Facet>,
}

impl TimelineDoc {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("timeline serializes");
        text.push('\n');
        text
    }
}

/// Number of events per matched keyword, most frequent first (ties by
/// keyword). Keywords without events are left out.
pub fn facet_counts(events: &[TimelineEvent]) -> Vec<Facet> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for event in events {
        for keyword in &event.matched_keywords {
            *counts.entry(keyword.as_str()).or_default() += 1;
        }
    }
    let mut facets: Vec<Facet> =
        counts.into_iter().map(|(keyword, count)| Facet { keyword: keyword.to_string(), count }).collect();
    facets.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.keyword.cmp(&b.keyword)));
    facets
}

/// A built timeline together with the expansion it came from.
#[derive(Debug, Clone)]
pub struct TimelineBuild<T> {
    pub doc: TimelineDoc,
    pub expansion: Expansion<T>,
}

/// Events matching only the mapped concept itself, the baseline that
/// expansion is meant to improve on.
pub fn concept_only_events(
    events: &EventStore,
    indicator: &Indicator,
    mapping: &ConceptMapping,
) -> Result<Vec<EventMatch>, EventError> {
    events.query(&[mapping.article_title.as_str()], indicator.year_min, indicator.year_max, EVENT_LANG)
}

pub fn build_timeline<T: Scalar, C: Corpus + ?Sized>(
    indicator: &Indicator,
    mapping: &ConceptMapping,
    config: &ExpansionConfig<T>,
    corpus: &C,
    events: &EventStore,
) -> Result<TimelineBuild<T>, TimelineError> {
    let stage = |stage: &'static str, message: String| TimelineError::Stage {
        indicator_id: indicator.id.clone(),
        stage,
        message,
    };
    let expansion = expand(corpus, &mapping.article_title, config).map_err(|e: RelatednessError| {
        let name = match e {
            RelatednessError::Harvest { .. } => "harvest",
            RelatednessError::HitCounts { .. } => "hit counts",
            RelatednessError::Score(_) => "scoring",
            RelatednessError::Config(_) => "expansion config",
        };
        stage(name, e.to_string())
    })?;

    let mut keywords = vec![TimelineKeyword { label: mapping.article_title.clone(), sr: 1.0 }];
    keywords.extend(
        expansion.keywords.iter().map(|k| TimelineKeyword { label: k.label.clone(), sr: k.sr.to_f64().unwrap_or(0.0) }),
    );
    let labels: Vec<&str> = keywords.iter().map(|k| k.label.as_str()).collect();
    let matches = events
        .query(&labels, indicator.year_min, indicator.year_max, EVENT_LANG)
        .map_err(|e| stage("event query", e.to_string()))?;
    let timeline_events: Vec<TimelineEvent> = matches.into_iter().map(TimelineEvent::from).collect();
    let facets = facet_counts(&timeline_events);
    Ok(TimelineBuild {
        doc: TimelineDoc {
            indicator_id: indicator.id.clone(),
            concept: mapping.article_title.clone(),
            keywords,
            events: timeline_events,
            facets,
        },
        expansion,
    })
}
