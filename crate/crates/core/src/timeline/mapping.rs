use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::preprocess::{preprocess_title, StopWords};
use super::TimelineError;
use crate::corpus::Corpus;
use crate::stats::Indicator;

/// Search results inspected when mapping automatically.
pub const SEARCH_DEPTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingMode {
    Manual,
    Auto,
}

impl std::str::FromStr for MappingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "manual" => Ok(MappingMode::Manual),
            "auto" => Ok(MappingMode::Auto),
            other => Err(format!("unknown mapping mode `{other}` (manual|auto)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptMapping {
    pub indicator_id: String,
    pub article_title: String,
    pub mode: MappingMode,
    /// The search results looked at (auto mode only).
    pub candidates_seen: Vec<String>,
}

/// Hand-curated `indicator_id<TAB>article_title` table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingTable(BTreeMap<String, String>);

impl MappingTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TimelineError> {
        let path = path.as_ref();
        let file =
            File::open(path).map_err(|e| TimelineError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, TimelineError> {
        let mut table = BTreeMap::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let bad = |message: String| TimelineError::Mappings { line: line_no, message };
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, title) =
                line.split_once('\t').ok_or_else(|| bad("expected `indicator_id<TAB>article_title`".into()))?;
            let (id, title) = (id.trim(), title.trim());
            if id.is_empty() || title.is_empty() || title.contains('\t') {
                return Err(bad("expected `indicator_id<TAB>article_title`".into()));
            }
            if table.insert(id.to_string(), title.to_string()).is_some() {
                return Err(bad(format!("duplicate mapping for `{id}`")));
            }
        }
        Ok(MappingTable(table))
    }

    pub fn get(&self, indicator_id: &str) -> Option<&str> {
        self.0.get(indicator_id).map(String::as_str)
    }

    pub fn insert(&mut self, indicator_id: impl Into<String>, title: impl Into<String>) {
        self.0.insert(indicator_id.into(), title.into());
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Resolve the article standing in for an indicator.
///
/// A table entry always wins. Without one, manual mode fails and auto mode
/// takes the first of the top search results for the preprocessed title.
pub fn map_concept<C: Corpus + ?Sized>(
    indicator: &Indicator,
    table: &MappingTable,
    mode: MappingMode,
    corpus: &C,
    stop_words: &StopWords,
) -> Result<ConceptMapping, TimelineError> {
    if let Some(title) = table.get(&indicator.id) {
        return Ok(ConceptMapping {
            indicator_id: indicator.id.clone(),
            article_title: title.to_string(),
            mode: MappingMode::Manual,
            candidates_seen: Vec::new(),
        });
    }
    let unmapped = |reason: String| TimelineError::Unmapped { indicator_id: indicator.id.clone(), reason };
    if mode == MappingMode::Manual {
        return Err(unmapped("no manual mapping".into()));
    }
    let query = preprocess_title(&indicator.title, stop_words)?;
    let candidates = corpus.search_articles(&query, SEARCH_DEPTH).map_err(|e| TimelineError::Stage {
        indicator_id: indicator.id.clone(),
        stage: "search",
        message: e.to_string(),
    })?;
    let first = candidates.first().cloned().ok_or_else(|| unmapped(format!("no search results for `{query}`")))?;
    Ok(ConceptMapping {
        indicator_id: indicator.id.clone(),
        article_title: first,
        mode: MappingMode::Auto,
        candidates_seen: candidates,
    })
}
