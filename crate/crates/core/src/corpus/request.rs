use std::fmt;
use std::hash::{Hash, Hasher};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    SearchArticles,
    ArticleLinksIn,
    ArticleLinksOut,
    HitCount,
    CoHitCount,
    BroaderNarrower,
    Categories,
    ArticleCount,
}

impl RequestKind {
    pub const ALL: [RequestKind; 8] = [
        RequestKind::SearchArticles,
        RequestKind::ArticleLinksIn,
        RequestKind::ArticleLinksOut,
        RequestKind::HitCount,
        RequestKind::CoHitCount,
        RequestKind::BroaderNarrower,
        RequestKind::Categories,
        RequestKind::ArticleCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RequestKind::SearchArticles => "search_articles",
            RequestKind::ArticleLinksIn => "article_links_in",
            RequestKind::ArticleLinksOut => "article_links_out",
            RequestKind::HitCount => "hit_count",
            RequestKind::CoHitCount => "co_hit_count",
            RequestKind::BroaderNarrower => "broader_narrower",
            RequestKind::Categories => "categories",
            RequestKind::ArticleCount => "article_count",
        }
    }

    /// Whether the payload is a count rather than a title list.
    pub fn is_count(self) -> bool {
        matches!(self, RequestKind::HitCount | RequestKind::CoHitCount | RequestKind::ArticleCount)
    }
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Broader,
    Narrower,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Broader => "broader",
            Direction::Narrower => "narrower",
        }
    }
}

/// Lowercase, collapse internal whitespace, strip punctuation at both ends.
pub fn normalize_term(raw: &str) -> String {
    collapse_whitespace(raw).trim_matches(|c: char| c.is_whitespace() || is_punctuation(c)).to_lowercase()
}

fn collapse_whitespace(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '\u{2010}'..='\u{2027}' | '\u{00ab}' | '\u{00bb}' | '\u{00bf}' | '\u{00a1}')
}

/// One corpus lookup. Identity (equality, hashing, the fixture key) depends
/// only on the kind and the normalized parameters; the original spellings
/// are kept for live calls, where title case matters.
#[derive(Debug, Clone)]
pub struct CorpusRequest {
    kind: RequestKind,
    params: Vec<String>,
    originals: Vec<String>,
}

impl CorpusRequest {
    pub fn new<S: AsRef<str>>(kind: RequestKind, params: &[S]) -> Self {
        let mut pairs: Vec<(String, String)> = params
            .iter()
            .map(|p| {
                let original = collapse_whitespace(p.as_ref());
                let original = original.trim_matches(|c: char| c.is_whitespace() || is_punctuation(c)).to_string();
                (normalize_term(p.as_ref()), original)
            })
            .collect();
        if kind == RequestKind::CoHitCount {
            pairs.sort();
        }
        let (params, originals) = pairs.into_iter().unzip();
        CorpusRequest { kind, params, originals }
    }

    pub fn search_articles(query: &str, limit: usize) -> Self {
        Self::new(RequestKind::SearchArticles, &[query, &limit.to_string()])
    }

    pub fn links_in(title: &str) -> Self {
        Self::new(RequestKind::ArticleLinksIn, &[title])
    }

    pub fn links_out(title: &str) -> Self {
        Self::new(RequestKind::ArticleLinksOut, &[title])
    }

    pub fn hit_count(term: &str) -> Self {
        Self::new(RequestKind::HitCount, &[term])
    }

    pub fn co_hit_count(a: &str, b: &str) -> Self {
        Self::new(RequestKind::CoHitCount, &[a, b])
    }

    /// Broader or narrower terms; the direction is the second parameter.
    pub fn broader_narrower(title: &str, direction: Direction) -> Self {
        Self::new(RequestKind::BroaderNarrower, &[title, direction.as_str()])
    }

    pub fn categories(title: &str) -> Self {
        Self::new(RequestKind::Categories, &[title])
    }

    pub fn article_count() -> Self {
        Self::new::<&str>(RequestKind::ArticleCount, &[])
    }

    pub fn kind(&self) -> RequestKind {
        self.kind
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    /// Parameters as given by the caller (whitespace collapsed, case kept).
    pub fn originals(&self) -> &[String] {
        &self.originals
    }

    /// Fixture/cache key: `kind` followed by the JSON encoding of the
    /// normalized parameter list.
    pub fn canonical_key(&self) -> String {
        // a JSON string array is an unambiguous encoding of Vec<String>
        format!("{}:{}", self.kind, serde_json::to_string(&self.params).expect("string list serializes"))
    }
}

impl PartialEq for CorpusRequest {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.params == other.params
    }
}

impl Eq for CorpusRequest {}

impl Hash for CorpusRequest {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.params.hash(state);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Count(u64),
    Titles(Vec<String>),
}

impl Payload {
    /// Title list with exact duplicates removed, first occurrence kept.
    pub fn titles<I: IntoIterator<Item = String>>(titles: I) -> Self {
        let mut seen = std::collections::HashSet::new();
        Payload::Titles(titles.into_iter().filter(|t| seen.insert(t.clone())).collect())
    }

    pub fn as_count(&self) -> Option<u64> {
        match self {
            Payload::Count(n) => Some(*n),
            Payload::Titles(_) => None,
        }
    }

    pub fn as_titles(&self) -> Option<&[String]> {
        match self {
            Payload::Titles(t) => Some(t),
            Payload::Count(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Live,
    Fixture,
    Cache,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusResponse {
    pub payload: Payload,
    pub fetched_at: DateTime<Utc>,
    pub origin: Origin,
}
