//! Uniform access to the encyclopedia corpus services: article search,
//! in/out links, full-text hit counts, total article count, and the
//! broader/narrower and category lookups of the linked-data endpoint.
//!
//! A [`Gateway`] runs in one of three modes:
//!
//! * `live`: every request goes to the network (repeats are served from an
//!   in-process cache),
//! * `record`: like live, and every fresh response is appended to a
//!   [`FixtureStore`],
//! * `replay`: responses come from a fixture store only; the network is
//!   never touched and a missing key is an error.

mod fixture;
mod live;
mod request;

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use chrono::Utc;

pub use fixture::{FixtureRecord, FixtureStore};
pub use live::{
    broader_narrower_query, categories_query, dbpedia_iri, label_from_iri, parse_article_count, parse_backlinks,
    parse_outlinks, parse_search_titles, parse_sparql_terms, parse_total_hits, search_expression, wiki_title, Backend,
    HttpBackend, HttpConfig, RateLimiter, RetryPolicy, DEFAULT_RATE_LIMIT, DEFAULT_SPARQL_ENDPOINT,
    DEFAULT_WIKI_ENDPOINT,
};
pub use request::{normalize_term, CorpusRequest, CorpusResponse, Direction, Origin, Payload, RequestKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("fixture miss: no recorded response for `{key}`")]
    FixtureMiss { key: String },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status} from {url}")]
    Http { status: u16, url: String },
    #[error("malformed payload from {url}: {message}")]
    Parse { url: String, message: String },
    #[error("{0} needs a non-empty term")]
    EmptyTerm(RequestKind),
    #[error("{kind} answered with the wrong payload shape")]
    PayloadShape { kind: RequestKind },
    #[error("{path}:{line}: {message}")]
    FixtureFormat { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("corpus configuration: {0}")]
    Config(String),
}

impl CorpusError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, CorpusError::Transport { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Live,
    Record,
    Replay,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "live" => Ok(Mode::Live),
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            other => Err(format!("unknown corpus mode `{other}` (live|record|replay)")),
        }
    }
}

/// Typed corpus lookups on top of a single `fetch` primitive.
pub trait Corpus: Sync {
    fn fetch(&self, request: &CorpusRequest) -> Result<CorpusResponse, CorpusError>;

    fn titles(&self, request: &CorpusRequest) -> Result<Vec<String>, CorpusError> {
        match self.fetch(request)?.payload {
            Payload::Titles(t) => Ok(t),
            Payload::Count(_) => Err(CorpusError::PayloadShape { kind: request.kind() }),
        }
    }

    fn count(&self, request: &CorpusRequest) -> Result<u64, CorpusError> {
        match self.fetch(request)?.payload {
            Payload::Count(n) => Ok(n),
            Payload::Titles(_) => Err(CorpusError::PayloadShape { kind: request.kind() }),
        }
    }

    /// Ranked article titles for a free-text query, at most `limit`.
    fn search_articles(&self, query: &str, limit: usize) -> Result<Vec<String>, CorpusError> {
        if normalize_term(query).is_empty() || limit == 0 {
            return Ok(Vec::new());
        }
        let mut titles = self.titles(&CorpusRequest::search_articles(query, limit))?;
        titles.truncate(limit);
        Ok(titles)
    }

    fn links_in(&self, title: &str) -> Result<Vec<String>, CorpusError> {
        self.titles(&CorpusRequest::links_in(title))
    }

    fn links_out(&self, title: &str) -> Result<Vec<String>, CorpusError> {
        self.titles(&CorpusRequest::links_out(title))
    }

    fn broader(&self, title: &str) -> Result<Vec<String>, CorpusError> {
        self.titles(&CorpusRequest::broader_narrower(title, Direction::Broader))
    }

    fn narrower(&self, title: &str) -> Result<Vec<String>, CorpusError> {
        self.titles(&CorpusRequest::broader_narrower(title, Direction::Narrower))
    }

    fn categories(&self, title: &str) -> Result<Vec<String>, CorpusError> {
        self.titles(&CorpusRequest::categories(title))
    }

    fn hit_count(&self, term: &str) -> Result<u64, CorpusError> {
        if normalize_term(term).is_empty() {
            return Err(CorpusError::EmptyTerm(RequestKind::HitCount));
        }
        self.count(&CorpusRequest::hit_count(term))
    }

    /// Articles matching both terms. A term paired with itself is its own
    /// hit count.
    fn co_hit_count(&self, a: &str, b: &str) -> Result<u64, CorpusError> {
        let (na, nb) = (normalize_term(a), normalize_term(b));
        if na.is_empty() || nb.is_empty() {
            return Err(CorpusError::EmptyTerm(RequestKind::CoHitCount));
        }
        if na == nb {
            return self.hit_count(a);
        }
        self.count(&CorpusRequest::co_hit_count(a, b))
    }

    fn total_articles(&self) -> Result<u64, CorpusError> {
        self.count(&CorpusRequest::article_count())
    }
}

pub struct Gateway {
    mode: Mode,
    fixtures: Option<FixtureStore>,
    backend: Option<Box<dyn Backend>>,
    cache: Mutex<HashMap<String, CorpusResponse>>,
    article_count: OnceLock<u64>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("mode", &self.mode)
            .field("fixtures", &self.fixtures.as_ref().map(FixtureStore::len))
            .field("live", &self.backend.is_some())
            .finish()
    }
}

impl Gateway {
    pub fn replay(fixtures: FixtureStore) -> Self {
        Self::build(Mode::Replay, Some(fixtures), None)
    }

    pub fn live(backend: Box<dyn Backend>) -> Self {
        Self::build(Mode::Live, None, Some(backend))
    }

    pub fn record(backend: Box<dyn Backend>, fixtures: FixtureStore) -> Self {
        Self::build(Mode::Record, Some(fixtures), Some(backend))
    }

    fn build(mode: Mode, fixtures: Option<FixtureStore>, backend: Option<Box<dyn Backend>>) -> Self {
        Gateway { mode, fixtures, backend, cache: Mutex::new(HashMap::new()), article_count: OnceLock::new() }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn fixtures(&self) -> Option<&FixtureStore> {
        self.fixtures.as_ref()
    }

    /// Cached response for a key, if any.
    pub fn cached(&self, request: &CorpusRequest) -> Option<CorpusResponse> {
        self.cache.lock().expect("cache lock").get(&request.canonical_key()).cloned()
    }

    fn fetch_network(&self, request: &CorpusRequest) -> Result<CorpusResponse, CorpusError> {
        let key = request.canonical_key();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(CorpusResponse { origin: Origin::Cache, ..hit.clone() });
        }
        let backend = self.backend.as_ref().ok_or_else(|| CorpusError::Config("no live backend configured".into()))?;
        let payload = backend.call(request)?;
        if request.kind().is_count() != payload.as_count().is_some() {
            return Err(CorpusError::PayloadShape { kind: request.kind() });
        }
        let response = CorpusResponse { payload, fetched_at: Utc::now(), origin: Origin::Live };
        if self.mode == Mode::Record {
            if let Some(store) = &self.fixtures {
                store.insert(FixtureRecord::new(request, response.payload.clone(), response.fetched_at))?;
            }
        }
        self.cache.lock().expect("cache lock").insert(key, response.clone());
        Ok(response)
    }
}

impl Corpus for Gateway {
    fn fetch(&self, request: &CorpusRequest) -> Result<CorpusResponse, CorpusError> {
        match self.mode {
            Mode::Replay => {
                let key = request.canonical_key();
                let record =
                    self.fixtures.as_ref().and_then(|store| store.get(&key)).ok_or(CorpusError::FixtureMiss { key })?;
                Ok(CorpusResponse { payload: record.payload, fetched_at: record.fetched_at, origin: Origin::Fixture })
            }
            Mode::Live | Mode::Record => self.fetch_network(request),
        }
    }

    /// The first answer is pinned for the lifetime of the gateway.
    fn total_articles(&self) -> Result<u64, CorpusError> {
        if let Some(n) = self.article_count.get() {
            return Ok(*n);
        }
        let n = self.count(&CorpusRequest::article_count())?;
        Ok(*self.article_count.get_or_init(|| n))
    }
}
