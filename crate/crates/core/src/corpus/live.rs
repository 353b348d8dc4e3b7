//! Network access to the MediaWiki API and a DBpedia-style SPARQL endpoint.

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use percent_encoding::percent_decode_str;
use reqwest::blocking::Client;
use reqwest::Url;
use serde_json::Value;

use super::request::{CorpusRequest, Direction, Payload, RequestKind};
use super::CorpusError;

pub const DEFAULT_WIKI_ENDPOINT: &str = "https://en.wikipedia.org/w/api.php";
pub const DEFAULT_SPARQL_ENDPOINT: &str = "https://dbpedia.org/sparql";
pub const DEFAULT_RATE_LIMIT: Duration = Duration::from_millis(100);

const USER_AGENT: &str = concat!("statlink/", env!("CARGO_PKG_VERSION"), " (corpus gateway)");
const DBPEDIA_RESOURCE: &str = "http://dbpedia.org/resource/";

/// Anything that can answer a corpus request over the network.
pub trait Backend: Send + Sync {
    fn call(&self, request: &CorpusRequest) -> Result<Payload, CorpusError>;
}

/// Enforces a minimum delay between consecutive requests across threads.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval: Duration,
    last: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> Self {
        RateLimiter { min_interval, last: Mutex::new(None) }
    }

    pub fn wait(&self) {
        let mut last = self.last.lock().expect("rate limiter lock");
        if let Some(prev) = *last {
            let ready = prev + self.min_interval;
            let now = Instant::now();
            if ready > now {
                thread::sleep(ready - now);
            }
        }
        *last = Some(Instant::now());
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, initial_backoff: Duration::from_millis(250) }
    }
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub wiki_endpoint: String,
    pub sparql_endpoint: String,
    pub rate_limit: Duration,
    pub retry: RetryPolicy,
    pub timeout: Duration,
    /// Upper bound on continuation pages followed for link lists.
    pub max_link_pages: usize,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            wiki_endpoint: DEFAULT_WIKI_ENDPOINT.to_string(),
            sparql_endpoint: DEFAULT_SPARQL_ENDPOINT.to_string(),
            rate_limit: DEFAULT_RATE_LIMIT,
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(30),
            max_link_pages: 10,
        }
    }
}

pub struct HttpBackend {
    client: Client,
    wiki: Url,
    sparql: Url,
    limiter: RateLimiter,
    retry: RetryPolicy,
    max_link_pages: usize,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend").field("wiki", &self.wiki.as_str()).field("sparql", &self.sparql.as_str()).finish()
    }
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, CorpusError> {
        let parse = |s: &str| Url::parse(s).map_err(|e| CorpusError::Config(format!("bad endpoint `{s}`: {e}")));
        let client = Client::builder()
            .user_agent(USER_AGENT)
            .timeout(config.timeout)
            .build()
            .map_err(|e| CorpusError::Config(e.to_string()))?;
        Ok(HttpBackend {
            client,
            wiki: parse(&config.wiki_endpoint)?,
            sparql: parse(&config.sparql_endpoint)?,
            limiter: RateLimiter::new(config.rate_limit),
            retry: config.retry,
            max_link_pages: config.max_link_pages.max(1),
        })
    }

    /// GET with rate limiting and retry. Only transport failures (connect,
    /// timeout, broken body) are retried, with exponential backoff; any HTTP
    /// error status is returned as is.
    fn get_json(&self, url: Url) -> Result<Value, CorpusError> {
        let attempts = self.retry.attempts.max(1);
        let mut backoff = self.retry.initial_backoff;
        let mut last_error = String::new();
        for attempt in 1..=attempts {
            self.limiter.wait();
            match self.client.get(url.clone()).header("Accept", "application/json").send() {
                Ok(response) => {
                    let status = response.status();
                    if !status.is_success() {
                        return Err(CorpusError::Http { status: status.as_u16(), url: url.to_string() });
                    }
                    match response.text() {
                        Ok(body) => {
                            return serde_json::from_str(&body)
                                .map_err(|e| CorpusError::Parse { url: url.to_string(), message: e.to_string() })
                        }
                        Err(e) => last_error = e.to_string(),
                    }
                }
                Err(e) => last_error = e.to_string(),
            }
            if attempt < attempts {
                thread::sleep(backoff);
                backoff *= 2;
            }
        }
        Err(CorpusError::Transport { attempts, message: last_error })
    }

    fn wiki_url(&self, params: &[(&str, &str)]) -> Url {
        let mut url = self.wiki.clone();
        url.query_pairs_mut()
            .append_pair("action", "query")
            .append_pair("format", "json")
            .append_pair("formatversion", "2")
            .extend_pairs(params);
        url
    }

    fn sparql_url(&self, query: &str) -> Url {
        let mut url = self.sparql.clone();
        url.query_pairs_mut().append_pair("query", query).append_pair("format", "application/sparql-results+json");
        url
    }

    fn titles_following_continuation(
        &self,
        base: &[(&str, &str)],
        continue_param: &str,
        parse: fn(&Value, &str) -> Result<Vec<String>, String>,
    ) -> Result<Vec<String>, CorpusError> {
        let mut titles = Vec::new();
        let mut token: Option<String> = None;
        for _ in 0..self.max_link_pages {
            let mut params: Vec<(&str, &str)> = base.to_vec();
            if let Some(t) = &token {
                params.push((continue_param, t));
            }
            let url = self.wiki_url(&params);
            let json = self.get_json(url.clone())?;
            titles.extend(
                parse(&json, url.as_ref()).map_err(|m| CorpusError::Parse { url: url.to_string(), message: m })?,
            );
            token =
                json.get("continue").and_then(|c| c.get(continue_param)).and_then(Value::as_str).map(str::to_string);
            if token.is_none() {
                break;
            }
        }
        Ok(titles)
    }

    fn sparql_terms(&self, query: &str) -> Result<Vec<String>, CorpusError> {
        let url = self.sparql_url(query);
        let json = self.get_json(url.clone())?;
        parse_sparql_terms(&json, "term").map_err(|m| CorpusError::Parse { url: url.to_string(), message: m })
    }
}

fn first_param(request: &CorpusRequest) -> Result<&str, CorpusError> {
    request
        .originals()
        .first()
        .map(String::as_str)
        .filter(|s| !s.is_empty())
        .ok_or(CorpusError::EmptyTerm(request.kind()))
}

/// Full-text search expression; multi-word terms become quoted phrases.
pub fn search_expression(term: &str) -> String {
    let term = term.replace('"', " ");
    let term = term.trim();
    if term.contains(char::is_whitespace) {
        format!("\"{term}\"")
    } else {
        term.to_string()
    }
}

/// Title with its first character uppercased, as MediaWiki stores it.
pub fn wiki_title(title: &str) -> String {
    let mut chars = title.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// DBpedia resource IRI for an article (or `Category:` page) title.
pub fn dbpedia_iri(title: &str) -> String {
    let local: String = wiki_title(title)
        .chars()
        .map(|c| match c {
            ' ' => '_'.to_string(),
            '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`' => format!("%{:02X}", c as u32),
            c => c.to_string(),
        })
        .collect();
    format!("<{DBPEDIA_RESOURCE}{local}>")
}

/// Readable label from a resource IRI: last path segment, percent-decoded,
/// underscores as spaces.
pub fn label_from_iri(iri: &str) -> String {
    let local = iri.rsplit('/').next().unwrap_or(iri);
    percent_decode_str(local).decode_utf8_lossy().replace('_', " ")
}

/// SKOS broader (or narrower) terms of the concept's own category.
pub fn broader_narrower_query(title: &str, direction: Direction) -> String {
    let category = dbpedia_iri(&format!("Category:{}", wiki_title(title)));
    let pattern = match direction {
        Direction::Broader => format!("{category} skos:broader ?term"),
        Direction::Narrower => format!("?term skos:broader {category}"),
    };
    format!("PREFIX skos: <http://www.w3.org/2004/02/skos/core#>\nSELECT DISTINCT ?term WHERE {{ {pattern} }}")
}

pub fn categories_query(title: &str) -> String {
    let resource = dbpedia_iri(title);
    format!("SELECT DISTINCT ?term WHERE {{ {resource} <http://purl.org/dc/terms/subject> ?term }}")
}

pub fn parse_search_titles(json: &Value, _ctx: &str) -> Result<Vec<String>, String> {
    let hits = json.pointer("/query/search").and_then(Value::as_array).ok_or("missing query.search")?;
    hits.iter()
        .map(|h| {
            h.get("title")
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| "search hit without title".to_string())
        })
        .collect()
}

pub fn parse_total_hits(json: &Value) -> Result<u64, String> {
    json.pointer("/query/searchinfo/totalhits")
        .and_then(Value::as_u64)
        .ok_or_else(|| "missing query.searchinfo.totalhits".to_string())
}

pub fn parse_outlinks(json: &Value, _ctx: &str) -> Result<Vec<String>, String> {
    let pages = json.pointer("/query/pages").ok_or("missing query.pages")?;
    let pages: Vec<&Value> = match pages {
        Value::Array(a) => a.iter().collect(),
        Value::Object(o) => o.values().collect(),
        _ => return Err("query.pages is neither list nor map".into()),
    };
    let mut titles = Vec::new();
    for page in pages {
        if let Some(links) = page.get("links").and_then(Value::as_array) {
            for link in links {
                titles.push(link.get("title").and_then(Value::as_str).ok_or("link without title")?.to_string());
            }
        }
    }
    Ok(titles)
}

pub fn parse_backlinks(json: &Value, _ctx: &str) -> Result<Vec<String>, String> {
    let links = json.pointer("/query/backlinks").and_then(Value::as_array).ok_or("missing query.backlinks")?;
    links
        .iter()
        .map(|l| {
            l.get("title")
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| "backlink without title".to_string())
        })
        .collect()
}

pub fn parse_article_count(json: &Value) -> Result<u64, String> {
    json.pointer("/query/statistics/articles")
        .and_then(Value::as_u64)
        .ok_or_else(|| "missing query.statistics.articles".to_string())
}

/// Values bound to `var` in a SPARQL JSON result, as readable labels.
pub fn parse_sparql_terms(json: &Value, var: &str) -> Result<Vec<String>, String> {
    let bindings = json.pointer("/results/bindings").and_then(Value::as_array).ok_or("missing results.bindings")?;
    let mut out = Vec::with_capacity(bindings.len());
    for b in bindings {
        let cell = b.get(var).ok_or_else(|| format!("binding without ?{var}"))?;
        let value = cell.get("value").and_then(Value::as_str).ok_or("binding without value")?;
        let label = match cell.get("type").and_then(Value::as_str) {
            Some("uri") => label_from_iri(value),
            _ => value.to_string(),
        };
        out.push(label);
    }
    Ok(out)
}

impl Backend for HttpBackend {
    fn call(&self, request: &CorpusRequest) -> Result<Payload, CorpusError> {
        let parse_err = |url: &Url, m: String| CorpusError::Parse { url: url.to_string(), message: m };
        match request.kind() {
            RequestKind::SearchArticles => {
                let query = first_param(request)?;
                let limit = request.params().get(1).cloned().unwrap_or_else(|| "10".into());
                let url =
                    self.wiki_url(&[("list", "search"), ("srsearch", query), ("srlimit", &limit), ("srprop", "")]);
                let json = self.get_json(url.clone())?;
                Ok(Payload::titles(parse_search_titles(&json, "").map_err(|m| parse_err(&url, m))?))
            }
            RequestKind::HitCount | RequestKind::CoHitCount => {
                if request.originals().iter().any(|p| p.is_empty()) || request.originals().is_empty() {
                    return Err(CorpusError::EmptyTerm(request.kind()));
                }
                let expr = request.originals().iter().map(|t| search_expression(t)).collect::<Vec<_>>().join(" ");
                let url = self.wiki_url(&[
                    ("list", "search"),
                    ("srsearch", &expr),
                    ("srlimit", "1"),
                    ("srinfo", "totalhits"),
                    ("srprop", ""),
                ]);
                let json = self.get_json(url.clone())?;
                Ok(Payload::Count(parse_total_hits(&json).map_err(|m| parse_err(&url, m))?))
            }
            RequestKind::ArticleLinksOut => {
                let title = wiki_title(first_param(request)?);
                let titles = self.titles_following_continuation(
                    &[
                        ("prop", "links"),
                        ("titles", &title),
                        ("plnamespace", "0"),
                        ("pllimit", "max"),
                        ("redirects", "1"),
                    ],
                    "plcontinue",
                    parse_outlinks,
                )?;
                Ok(Payload::titles(titles))
            }
            RequestKind::ArticleLinksIn => {
                let title = wiki_title(first_param(request)?);
                let titles = self.titles_following_continuation(
                    &[("list", "backlinks"), ("bltitle", &title), ("blnamespace", "0"), ("bllimit", "max")],
                    "blcontinue",
                    parse_backlinks,
                )?;
                Ok(Payload::titles(titles))
            }
            RequestKind::ArticleCount => {
                let url = self.wiki_url(&[("meta", "siteinfo"), ("siprop", "statistics")]);
                let json = self.get_json(url.clone())?;
                Ok(Payload::Count(parse_article_count(&json).map_err(|m| parse_err(&url, m))?))
            }
            RequestKind::BroaderNarrower => {
                let direction = match request.params().get(1).map(String::as_str) {
                    Some("narrower") => Direction::Narrower,
                    _ => Direction::Broader,
                };
                Ok(Payload::titles(self.sparql_terms(&broader_narrower_query(first_param(request)?, direction))?))
            }
            RequestKind::Categories => {
                Ok(Payload::titles(self.sparql_terms(&categories_query(first_param(request)?))?))
            }
        }
    }
}
