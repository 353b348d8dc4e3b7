//! Historical events corpus with keyword search over a year interval.
//!
//! Events come from a JSON-lines file, one object per line:
//!
//! ```json
//! {"event_id": "e1", "date": "1921-03-17", "granularity": "day",
//!  "description": "Marie Stopes opens ...", "category": "Health",
//!  "links": [{"text": "Marie Stopes", "target": "Marie Stopes"}],
//!  "thumbnail": null, "lang": "en"}
//! ```
//!
//! Dates are `YYYY[-MM[-DD]]`; BC years carry a leading `-` and there is no
//! year zero (`-1` is 1 BC).

mod matching;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use matching::{contains_phrase, match_rule, tokenize};

/// Year bounds accepted for the bundled corpus.
pub const CORPUS_YEAR_MIN: i32 = -300;
pub const CORPUS_YEAR_MAX: i32 = 2100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EventError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate event_id `{event_id}`")]
    Duplicate { line: usize, event_id: String },
    #[error("inverted interval: {from} > {to}")]
    InvertedInterval { from: i32, to: i32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Year,
    Month,
    Day,
}

/// Calendar date with optional month and day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventDate {
    pub year: i32,
    pub month: Option<u8>,
    pub day: Option<u8>,
}

impl EventDate {
    pub fn granularity(&self) -> Granularity {
        match (self.month, self.day) {
            (Some(_), Some(_)) => Granularity::Day,
            (Some(_), None) => Granularity::Month,
            _ => Granularity::Year,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.year == 0 {
            return Err("year zero does not exist".into());
        }
        if let Some(m) = self.month {
            if !(1..=12).contains(&m) {
                return Err(format!("month {m} out of range"));
            }
        }
        match (self.month, self.day) {
            (None, Some(_)) => Err("day without month".into()),
            (Some(m), Some(d)) => {
                // proleptic Gregorian with astronomical numbering for BC
                let astronomical = if self.year < 0 { self.year + 1 } else { self.year };
                NaiveDate::from_ymd_opt(astronomical, u32::from(m), u32::from(d))
                    .map(|_| ())
                    .ok_or_else(|| format!("day {d} invalid for month {m}"))
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for EventDate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let mut parts = body.split('-');
        let year_text = parts.next().unwrap_or_default();
        if year_text.is_empty() || !year_text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad year in date `{s}`"));
        }
        let year: i32 = year_text.parse().map_err(|_| format!("bad year in date `{s}`"))?;
        let two_digits = |part: Option<&str>| -> Result<Option<u8>, String> {
            match part {
                None => Ok(None),
                Some(p) if p.len() == 2 && p.bytes().all(|b| b.is_ascii_digit()) => Ok(Some(p.parse().unwrap())),
                Some(p) => Err(format!("bad date component `{p}` in `{s}`")),
            }
        };
        let month = two_digits(parts.next())?;
        let day = two_digits(parts.next())?;
        if parts.next().is_some() {
            return Err(format!("trailing components in date `{s}`"));
        }
        let date = EventDate { year: if negative { -year } else { year }, month, day };
        date.validate()?;
        Ok(date)
    }
}

impl fmt::Display for EventDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.year < 0 {
            write!(f, "-{:04}", -self.year)?;
        } else {
            write!(f, "{:04}", self.year)?;
        }
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
        }
        if let Some(d) = self.day {
            write!(f, "-{d:02}")?;
        }
        Ok(())
    }
}

impl Serialize for EventDate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EventDate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLink {
    pub text: String,
    pub target: String,
}

fn default_lang() -> String {
    "en".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoricalEvent {
    pub event_id: String,
    pub date: EventDate,
    pub granularity: Granularity,
    pub description: String,
    #[serde(default)]
    pub category: Option<String>,
    #[serde(default)]
    pub links: Vec<EventLink>,
    #[serde(default)]
    pub thumbnail: Option<String>,
    #[serde(default = "default_lang")]
    pub lang: String,
}

impl HistoricalEvent {
    pub fn year(&self) -> i32 {
        self.date.year
    }

    /// Chronological order: date, then id.
    pub fn chronological(a: &Self, b: &Self) -> Ordering {
        a.date.cmp(&b.date).then_with(|| a.event_id.cmp(&b.event_id))
    }

    fn validate(&self, years: (i32, i32)) -> Result<(), String> {
        if self.event_id.trim().is_empty() {
            return Err("empty event_id".into());
        }
        if self.description.trim().is_empty() {
            return Err("empty description".into());
        }
        if self.granularity != self.date.granularity() {
            return Err(format!("granularity {:?} does not match date {}", self.granularity, self.date));
        }
        if self.date.year < years.0 || self.date.year > years.1 {
            return Err(format!("year {} outside [{}, {}]", self.date.year, years.0, years.1));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventMatch {
    pub event: HistoricalEvent,
    /// Every query keyword that matches, in query order.
    pub matched_keywords: Vec<String>,
}

/// Immutable, chronologically ordered event collection with a token index.
#[derive(Debug, Clone, Default)]
pub struct EventStore {
    events: Vec<HistoricalEvent>,
    tokens: Vec<Vec<String>>,
    postings: HashMap<String, Vec<u32>>,
}

impl EventStore {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EventError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| EventError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, EventError> {
        Self::from_reader_with_years(reader, (CORPUS_YEAR_MIN, CORPUS_YEAR_MAX))
    }

    pub fn from_reader_with_years<R: Read>(reader: R, years: (i32, i32)) -> Result<Self, EventError> {
        let mut events = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| EventError::Malformed { line: line_no, message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let event: HistoricalEvent = serde_json::from_str(&line)
                .map_err(|e| EventError::Malformed { line: line_no, message: e.to_string() })?;
            event.validate(years).map_err(|message| EventError::Malformed { line: line_no, message })?;
            if !seen.insert(event.event_id.clone()) {
                return Err(EventError::Duplicate { line: line_no, event_id: event.event_id });
            }
            events.push(event);
        }
        Ok(Self::index(events))
    }

    /// Build from in-memory events, validating like the file loader.
    pub fn from_events(events: Vec<HistoricalEvent>) -> Result<Self, EventError> {
        let mut seen = HashSet::new();
        for (i, event) in events.iter().enumerate() {
            event
                .validate((CORPUS_YEAR_MIN, CORPUS_YEAR_MAX))
                .map_err(|message| EventError::Malformed { line: i + 1, message })?;
            if !seen.insert(event.event_id.as_str()) {
                return Err(EventError::Duplicate { line: i + 1, event_id: event.event_id.clone() });
            }
        }
        Ok(Self::index(events))
    }

    fn index(mut events: Vec<HistoricalEvent>) -> Self {
        events.sort_by(HistoricalEvent::chronological);
        let tokens: Vec<Vec<String>> = events.iter().map(|e| tokenize(&e.description)).collect();
        let mut postings: HashMap<String, Vec<u32>> = HashMap::new();
        for (pos, toks) in tokens.iter().enumerate() {
            let unique: HashSet<&String> = toks.iter().collect();
            for t in unique {
                postings.entry(t.clone()).or_default().push(pos as u32);
            }
        }
        EventStore { events, tokens, postings }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// All events in chronological order.
    pub fn events(&self) -> &[HistoricalEvent] {
        &self.events
    }

    pub fn in_year(&self, year: i32) -> &[HistoricalEvent] {
        let (lo, hi) = self.year_bounds(year, year);
        &self.events[lo..hi]
    }

    fn year_bounds(&self, from: i32, to: i32) -> (usize, usize) {
        let lo = self.events.partition_point(|e| e.date.year < from);
        let hi = self.events.partition_point(|e| e.date.year <= to);
        (lo, hi.max(lo))
    }

    /// Events in `[year_from, year_to]` with language `lang` whose
    /// description matches at least one keyword, chronologically.
    pub fn query<S: AsRef<str>>(
        &self,
        keywords: &[S],
        year_from: i32,
        year_to: i32,
        lang: &str,
    ) -> Result<Vec<EventMatch>, EventError> {
        if year_from > year_to {
            return Err(EventError::InvertedInterval { from: year_from, to: year_to });
        }
        let (lo, hi) = self.year_bounds(year_from, year_to);
        let mut hits: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        let mut seen_keywords = HashSet::new();
        for keyword in keywords {
            let keyword = keyword.as_ref();
            if !seen_keywords.insert(keyword) {
                continue;
            }
            let phrase = tokenize(keyword);
            // rarest token drives the candidate set
            let Some(postings) = phrase.iter().map(|t| self.postings.get(t)).collect::<Option<Vec<_>>>() else {
                continue;
            };
            let Some(rarest) = postings.iter().min_by_key(|p| p.len()) else {
                continue;
            };
            let start = rarest.partition_point(|&p| (p as usize) < lo);
            for &pos in &rarest[start..] {
                let pos = pos as usize;
                if pos >= hi {
                    break;
                }
                if self.events[pos].lang == lang && contains_phrase(&self.tokens[pos], &phrase) {
                    hits.entry(pos).or_default().push(keyword.to_string());
                }
            }
        }
        Ok(hits
            .into_iter()
            .map(|(pos, matched_keywords)| EventMatch { event: self.events[pos].clone(), matched_keywords })
            .collect())
    }
}
