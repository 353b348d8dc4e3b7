/// Lowercased alphanumeric runs of `text`; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Whether `tokens` occurs as a contiguous run inside `haystack`.
pub fn contains_phrase<S: AsRef<str>>(haystack: &[S], tokens: &[S]) -> bool {
    if tokens.is_empty() || tokens.len() > haystack.len() {
        return false;
    }
    haystack.windows(tokens.len()).any(|w| w.iter().zip(tokens).all(|(a, b)| a.as_ref() == b.as_ref()))
}

/// Case-insensitive whole-word phrase match: the keyword's tokens must
/// appear consecutively in the description. Punctuation only separates.
pub fn match_rule(keyword: &str, description: &str) -> bool {
    contains_phrase(&tokenize(description), &tokenize(keyword))
}
