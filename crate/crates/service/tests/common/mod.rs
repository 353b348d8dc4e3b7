#![allow(dead_code)]

use std::path::{Path, PathBuf};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::Value;
use statlink::state::{CATALOG_FILE, OBSERVATIONS_FILE};
use statlink_core::corpus::{FixtureStore, Gateway};
use statlink_core::events::EventStore;
use statlink_core::stats::load_statistics;
use statlink_core::timeline::{build_all, MappingMode, MappingTable, RunReport, StopWords};
use statlink_core::{BuildOptions, Catalog, ExpansionConfig};
use tower::ServiceExt;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn data(name: &str) -> PathBuf {
    repo_root().join("data").join(name)
}

pub fn replay_gateway() -> Gateway {
    Gateway::replay(FixtureStore::load(data("fixtures/corpus.jsonl")).unwrap())
}

/// Stage the bundled statistics and build timelines into `dir`, the same
/// steps as `ingest` followed by `build`.
pub fn build_sample(dir: &Path) -> RunReport {
    let cat: Catalog = load_statistics(data("catalog.csv"), data("observations.csv")).unwrap();
    let mut bytes = Vec::new();
    cat.write_catalog_csv(&mut bytes).unwrap();
    std::fs::write(dir.join(CATALOG_FILE), &bytes).unwrap();
    bytes.clear();
    cat.write_observations_csv(&mut bytes).unwrap();
    std::fs::write(dir.join(OBSERVATIONS_FILE), &bytes).unwrap();

    let gw = replay_gateway();
    let options = BuildOptions {
        mode: MappingMode::Manual,
        config: ExpansionConfig::from_corpus(&gw).unwrap(),
        stop_words: StopWords::default(),
        out_dir: dir.to_path_buf(),
    };
    let table = MappingTable::load(data("mappings.tsv")).unwrap();
    let events = EventStore::load(data("events.jsonl")).unwrap();
    build_all(&cat, &table, &gw, &events, &options).unwrap()
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let response = app.clone().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = response.status();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    let value =
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

pub fn schema(name: &str) -> jsonschema::Validator {
    let path = repo_root().join("docs/schemas").join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

/// Schema violations as readable lines; empty when valid.
pub fn violations(validator: &jsonschema::Validator, value: &Value) -> Vec<String> {
    validator.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path)).collect()
}
