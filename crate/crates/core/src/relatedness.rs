//! Related-concept harvesting and hit-count based semantic relatedness.
//!
//! The distance between two concepts is the normalized log-ratio of their
//! full-text hit counts:
//!
//! ```text
//!         log10(max(A, B)) - log10(A AND B)
//! ngd = -----------------------------------
//!           log10(W) - log10(min(A, B))
//! ```
//!
//! where `W` is the number of articles in the corpus. Relatedness is the
//! similarity `sr = clamp(1 - ngd, 0, 1)`: 1 for concepts that always
//! co-occur, 0 for concepts that never do.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_term, Corpus, CorpusError};
use crate::scalar::Scalar;

pub const DEFAULT_SR_THRESHOLD: f64 = 0.3;
pub const DEFAULT_MAX_CANDIDATES: usize = 500;

/// Namespace prefixes removed from harvested labels.
const NAMESPACES: [&str; 10] =
    ["category", "template", "portal", "wikipedia", "file", "help", "draft", "module", "special", "talk"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    /// One side has no hits at all; the pair cannot be scored.
    #[error("unscorable pair (a_hits={a_hits}, b_hits={b_hits})")]
    Unscorable { a_hits: u64, b_hits: u64 },
    #[error("invalid corpus: total {w_total} is not above min(a, b) = {min_hits}")]
    InvalidCorpus { w_total: u64, min_hits: u64 },
}

/// Normalized distance for hit counts `a`, `b`, their conjunction `co` and
/// corpus size `w`. `co == 0` gives +infinity; `co` above `min(a, b)` is
/// clamped down first, so the result is never negative.
pub fn ngd<T: Scalar>(a_hits: u64, b_hits: u64, co_hits: u64, w_total: u64) -> Result<T, ScoreError> {
    if a_hits == 0 || b_hits == 0 {
        return Err(ScoreError::Unscorable { a_hits, b_hits });
    }
    let (lo, hi) = if a_hits <= b_hits { (a_hits, b_hits) } else { (b_hits, a_hits) };
    if w_total <= lo {
        return Err(ScoreError::InvalidCorpus { w_total, min_hits: lo });
    }
    if co_hits == 0 {
        return Ok(T::infinity());
    }
    let co = co_hits.min(lo);
    let log = |n: u64| T::from_count(n).log10();
    let distance = (log(hi) - log(co)) / (log(w_total) - log(lo));
    Ok(distance.max(T::zero()))
}

/// Similarity view of a distance: `clamp(1 - ngd, 0, 1)`.
pub fn sr_from_ngd<T: Scalar>(ngd: T) -> T {
    if ngd.is_infinite() {
        return T::zero();
    }
    (T::one() - ngd).clamp_to(T::zero(), T::one())
}

pub fn sr_score<T: Scalar>(a_hits: u64, b_hits: u64, co_hits: u64, w_total: u64) -> Result<T, ScoreError> {
    ngd::<T>(a_hits, b_hits, co_hits, w_total).map(sr_from_ngd)
}

/// Where a harvested concept came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkSource {
    Inlink,
    Outlink,
    Broader,
    Narrower,
    Category,
}

impl LinkSource {
    pub const ALL: [LinkSource; 5] =
        [LinkSource::Inlink, LinkSource::Outlink, LinkSource::Broader, LinkSource::Narrower, LinkSource::Category];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkSource::Inlink => "inlink",
            LinkSource::Outlink => "outlink",
            LinkSource::Broader => "broader",
            LinkSource::Narrower => "narrower",
            LinkSource::Category => "category",
        }
    }
}

impl fmt::Display for LinkSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Harvested, not yet scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub label: String,
    pub sources: BTreeSet<LinkSource>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptCandidate<T> {
    pub label: String,
    pub sources: BTreeSet<LinkSource>,
    pub a_hits: u64,
    pub b_hits: u64,
    /// As reported by the corpus (scoring clamps it to `min(a, b)`).
    pub co_hits: u64,
    pub ngd: T,
    pub sr: T,
}

#[derive(Debug, thiserror::Error)]
pub enum RelatednessError {
    #[error("harvesting {source_list} of `{concept}`: {source}")]
    Harvest {
        concept: String,
        source_list: &'static str,
        #[source]
        source: CorpusError,
    },
    #[error("hit counts for `{term}`: {source}")]
    HitCounts {
        term: String,
        #[source]
        source: CorpusError,
    },
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("expansion config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConfig<T> {
    /// Number of articles in the corpus.
    pub w_total: u64,
    /// Candidates need `sr` strictly above this.
    pub sr_threshold: T,
    pub max_candidates: usize,
}

impl<T: Scalar> ExpansionConfig<T> {
    pub fn new(w_total: u64, sr_threshold: T, max_candidates: usize) -> Result<Self, RelatednessError> {
        if w_total == 0 {
            return Err(RelatednessError::Config("w_total must be positive".into()));
        }
        if !(sr_threshold >= T::zero() && sr_threshold <= T::one()) {
            return Err(RelatednessError::Config(format!("sr_threshold {sr_threshold} outside [0, 1]")));
        }
        if max_candidates == 0 {
            return Err(RelatednessError::Config("max_candidates must be positive".into()));
        }
        Ok(ExpansionConfig { w_total, sr_threshold, max_candidates })
    }

    /// Default threshold and cap, corpus size taken from the corpus itself.
    pub fn from_corpus<C: Corpus + ?Sized>(corpus: &C) -> Result<Self, RelatednessError> {
        let w_total = corpus
            .total_articles()
            .map_err(|source| RelatednessError::HitCounts { term: "<article count>".into(), source })?;
        Self::new(w_total, T::from_f64(DEFAULT_SR_THRESHOLD).expect("threshold fits"), DEFAULT_MAX_CANDIDATES)
    }
}

/// Counters describing what happened to harvested candidates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ExpansionDiagnostics {
    pub harvested: usize,
    /// One side had zero hits; dropped.
    pub unscorable: usize,
    pub below_threshold: usize,
    pub truncated: usize,
    /// `co_hits > min(a_hits, b_hits)`: the corpus contradicted itself.
    pub inconsistent: usize,
    /// A per-term hit count above the configured corpus size.
    pub exceeds_total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion<T> {
    pub concept: String,
    pub seed_hits: u64,
    /// Strictly above threshold, best first.
    pub keywords: Vec<ConceptCandidate<T>>,
    pub diagnostics: ExpansionDiagnostics,
}

/// One line of the expansion output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub concept: String,
    pub keyword: String,
    pub sr: f64,
    pub ngd: f64,
    pub sources: Vec<LinkSource>,
    pub a_hits: u64,
    pub b_hits: u64,
    pub co_hits: u64,
}

impl<T: Scalar> Expansion<T> {
    pub fn records(&self) -> Vec<ExpansionRecord> {
        self.keywords
            .iter()
            .map(|k| ExpansionRecord {
                concept: self.concept.clone(),
                keyword: k.label.clone(),
                sr: k.sr.to_f64().unwrap_or(0.0),
                ngd: k.ngd.to_f64().unwrap_or(f64::INFINITY),
                sources: k.sources.iter().copied().collect(),
                a_hits: k.a_hits,
                b_hits: k.b_hits,
                co_hits: k.co_hits,
            })
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in self.records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().map(|k| k.label.as_str())
    }
}

/// Drop a leading `Namespace:` prefix such as `Category:`.
pub fn strip_namespace(label: &str) -> &str {
    if let Some((prefix, rest)) = label.split_once(':') {
        if NAMESPACES.contains(&prefix.trim().to_ascii_lowercase().as_str()) {
            return rest.trim();
        }
    }
    label.trim()
}

/// Union of the five related-concept lists for `concept`, deduplicated
/// case-insensitively with sources merged, the concept itself removed.
/// Sorted by normalized label.
pub fn harvest_candidates<C: Corpus + ?Sized>(corpus: &C, concept: &str) -> Result<Vec<Candidate>, RelatednessError> {
    let seed = normalize_term(concept);
    let mut merged: HashMap<String, Candidate> = HashMap::new();
    for source in LinkSource::ALL {
        let list = match source {
            LinkSource::Inlink => corpus.links_in(concept),
            LinkSource::Outlink => corpus.links_out(concept),
            LinkSource::Broader => corpus.broader(concept),
            LinkSource::Narrower => corpus.narrower(concept),
            LinkSource::Category => corpus.categories(concept),
        }
        .map_err(|e| RelatednessError::Harvest {
            concept: concept.to_string(),
            source_list: source.as_str(),
            source: e,
        })?;
        for raw in list {
            let label = strip_namespace(&raw);
            let key = normalize_term(label);
            if key.is_empty() || key == seed {
                continue;
            }
            merged
                .entry(key)
                .or_insert_with(|| Candidate { label: label.to_string(), sources: BTreeSet::new() })
                .sources
                .insert(source);
        }
    }
    let mut candidates: Vec<(String, Candidate)> = merged.into_iter().collect();
    candidates.sort_by(|(a, _), (b, _)| a.cmp(b));
    Ok(candidates.into_iter().map(|(_, c)| c).collect())
}

/// Best-first ordering: sr descending, then label.
pub fn rank_order<T: Scalar>(a: &ConceptCandidate<T>, b: &ConceptCandidate<T>) -> std::cmp::Ordering {
    b.sr.partial_cmp(&a.sr).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.label.cmp(&b.label))
}

enum Scored<T> {
    Kept(ConceptCandidate<T>),
    Unscorable,
}

/// A scored candidate plus its (inconsistent, exceeds_total) flags.
type ScoredFlags<T> = Result<(Scored<T>, bool, bool), RelatednessError>;

/// Score every harvested candidate against `concept` and keep those with
/// `sr > threshold`, best first, at most `max_candidates`.
pub fn expand<T: Scalar, C: Corpus + ?Sized>(
    corpus: &C,
    concept: &str,
    config: &ExpansionConfig<T>,
) -> Result<Expansion<T>, RelatednessError> {
    let candidates = harvest_candidates(corpus, concept)?;
    let mut diagnostics = ExpansionDiagnostics { harvested: candidates.len(), ..Default::default() };
    let seed_hits = corpus
        .hit_count(concept)
        .map_err(|source| RelatednessError::HitCounts { term: concept.to_string(), source })?;

    let scored: Vec<ScoredFlags<T>> = candidates
        .into_par_iter()
        .map(|candidate| {
            let hits_err = |source| RelatednessError::HitCounts { term: candidate.label.clone(), source };
            let b_hits = corpus.hit_count(&candidate.label).map_err(hits_err)?;
            if seed_hits == 0 || b_hits == 0 {
                return Ok((Scored::Unscorable, false, false));
            }
            let co_hits = corpus.co_hit_count(concept, &candidate.label).map_err(hits_err)?;
            let inconsistent = co_hits > seed_hits.min(b_hits);
            let exceeds = seed_hits.max(b_hits) > config.w_total;
            let distance = ngd::<T>(seed_hits, b_hits, co_hits, config.w_total)?;
            Ok((
                Scored::Kept(ConceptCandidate {
                    label: candidate.label,
                    sources: candidate.sources,
                    a_hits: seed_hits,
                    b_hits,
                    co_hits,
                    ngd: distance,
                    sr: sr_from_ngd(distance),
                }),
                inconsistent,
                exceeds,
            ))
        })
        .collect();

    let mut keywords = Vec::new();
    for result in scored {
        let (scored, inconsistent, exceeds) = result?;
        diagnostics.inconsistent += usize::from(inconsistent);
        diagnostics.exceeds_total += usize::from(exceeds);
        match scored {
            Scored::Unscorable => diagnostics.unscorable += 1,
            Scored::Kept(c) if c.sr > config.sr_threshold => keywords.push(c),
            Scored::Kept(_) => diagnostics.below_threshold += 1,
        }
    }
    keywords.sort_by(rank_order);
    if keywords.len() > config.max_candidates {
        diagnostics.truncated = keywords.len() - config.max_candidates;
        keywords.truncate(config.max_candidates);
    }
    Ok(Expansion { concept: concept.to_string(), seed_hits, keywords, diagnostics })
}
