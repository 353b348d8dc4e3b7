use std::collections::HashMap;
use std::sync::OnceLock;

static TABLE_CSV: &str = include_str!("../../data/countries.csv");

fn table() -> &'static HashMap<String, String> {
    static TABLE: OnceLock<HashMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut reader = csv::Reader::from_reader(TABLE_CSV.as_bytes());
        reader
            .records()
            .filter_map(Result::ok)
            .filter(|r| r.len() == 2)
            .map(|r| (r[0].to_string(), r[1].to_string()))
            .collect()
    })
}

/// Display name for an ISO 3166-1 alpha-3 code, if the bundled table knows it.
pub fn country_name(code: &str) -> Option<&'static str> {
    table().get(code).map(String::as_str)
}

/// Number of entries in the bundled code table.
pub fn known_country_count() -> usize {
    table().len()
}
