use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use super::TimelineError;

static DEFAULT_STOP_WORDS: &str = include_str!("../../data/stopwords.txt");

/// Words dropped from titles before they are used as search queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// Parse one word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TimelineError> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map(|text| Self::parse(&text))
            .map_err(|e| TimelineError::Io { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> Self {
        StopWords(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

impl Default for StopWords {
    fn default() -> Self {
        Self::parse(DEFAULT_STOP_WORDS)
    }
}

struct UnitPatterns {
    bracketed_unit: Regex,
    per_quantity: Regex,
    unit_marker: Regex,
}

fn patterns() -> &'static UnitPatterns {
    static PATTERNS: OnceLock<UnitPatterns> = OnceLock::new();
    PATTERNS.get_or_init(|| UnitPatterns {
        // a bracketed group that carries a unit: (%), (% of GDP), (US$), [per 1,000 people]
        bracketed_unit: Regex::new(
            r"(?i)[(\[][^)\]]*?(?:%|‰|\$|€|£|¥|\b(?:usd|eur|gbp|jpy)\b|\bper\s+\d[\d,.]*)[^)\]]*[)\]]",
        )
        .unwrap(),
        per_quantity: Regex::new(r"(?i)\bper\s+\d[\d,.]*(?:\s*(?:thousand|million|billion|k))?").unwrap(),
        unit_marker: Regex::new(r"(?i)(?:\bus\$|%|‰|\$|€|£|¥|\b(?:usd|eur|gbp|jpy)\b)").unwrap(),
    })
}

/// Turn an indicator title into a search query: drop unit expressions,
/// punctuation and stop words, lowercase, single spaces. Words inside
/// ordinary parentheses are kept.
pub fn preprocess_title(title: &str, stop_words: &StopWords) -> Result<String, TimelineError> {
    let p = patterns();
    let text = p.bracketed_unit.replace_all(title, " ");
    let text = p.per_quantity.replace_all(&text, " ");
    let text = p.unit_marker.replace_all(&text, " ");
    let text: String = text.chars().map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
    let words: Vec<String> =
        text.split_whitespace().map(str::to_lowercase).filter(|w| !stop_words.contains(w)).collect();
    if words.is_empty() {
        return Err(TimelineError::Untitled { title: title.to_string() });
    }
    Ok(words.join(" "))
}
