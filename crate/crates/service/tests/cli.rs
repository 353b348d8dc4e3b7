mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use common::data;

fn statlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_statlink"))
        .args(args)
        .env("STATLINK_FIXTURES", data("fixtures/corpus.jsonl"))
        .env_remove("STATLINK_BUILD_DIR")
        .env_remove("STATLINK_MAPPINGS")
        .env_remove("STATLINK_CORPUS_MODE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ingest(dir: &Path) {
    let d = dir.to_str().unwrap();
    let out = statlink(&[
        "ingest",
        "--catalog",
        data("catalog.csv").to_str().unwrap(),
        "--observations",
        data("observations.csv").to_str().unwrap(),
        "--build-dir",
        d,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("staged 3 indicators"));
}

#[test]
fn sr_of_identical_terms_is_one() {
    let out = statlink(&["sr", "fertility", "fertility"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "sr\t1"), "{text}");
    assert!(text.lines().any(|l| l == "ngd\t0"), "{text}");
}

#[test]
fn related_matches_expand() {
    let dir = tempfile::tempdir().unwrap();
    ingest(dir.path());
    let related = statlink(&["related", "Fertility", "--threshold", "0.3"]);
    assert!(related.status.success(), "{}", stderr(&related));
    let related_labels: Vec<String> =
        stdout(&related).lines().map(|l| l.split('\t').nth(1).unwrap().to_string()).collect();

    let expanded = statlink(&[
        "expand",
        "--build-dir",
        dir.path().to_str().unwrap(),
        "--mappings",
        data("mappings.tsv").to_str().unwrap(),
    ]);
    assert!(expanded.status.success(), "{}", stderr(&expanded));
    let expand_labels: Vec<String> = stdout(&expanded)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["concept"] == "Fertility")
        .map(|v| v["keyword"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(related_labels, expand_labels);
    assert_eq!(related_labels.len(), 25);
}

#[test]
fn build_without_mappings_fails() {
    let dir = tempfile::tempdir().unwrap();
    ingest(dir.path());
    let d = dir.path().to_str().unwrap();
    let events = data("events.jsonl");
    let out = statlink(&["build", "--build-dir", d, "--events", events.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("no mappings"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);

    let out = statlink(&["build", "--build-dir", d, "--events", events.to_str().unwrap(), "--mappings", "/nope.tsv"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("no mappings"));
}

#[test]
fn failures_exit_non_zero_with_one_line() {
    for args in [
        &["build", "--build-dir", "/nonexistent/dir", "--events", "x.jsonl", "--mappings", "/nope.tsv"][..],
        &["sr", "fertility", "unrecorded-term"],
        &["serve", "--build-dir", "/nonexistent/dir"],
        &["related", "Unrecorded"],
        &["ingest", "--catalog", "/nope.csv", "--observations", "/nope.csv", "--build-dir", "/tmp/x"],
    ] {
        let out = statlink(args);
        assert!(!out.status.success(), "{args:?}");
        let err = stderr(&out);
        assert!(err.starts_with("error: "), "{args:?}: {err}");
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
    let out = statlink(&["sr", "a", "b", "--mode", "sideways"]);
    assert!(!out.status.success());
}

#[test]
fn build_then_serve() {
    let dir = tempfile::tempdir().unwrap();
    ingest(dir.path());
    let d = dir.path().to_str().unwrap();
    let out = statlink(&[
        "build",
        "--build-dir",
        d,
        "--events",
        data("events.jsonl").to_str().unwrap(),
        "--mappings",
        data("mappings.tsv").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("built 2 timelines (1 skipped)"));

    let mut child = Command::new(env!("CARGO_BIN_EXE_statlink"))
        .args(["serve", "--build-dir", d, "--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap().to_string();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /api/statistics/tfr/facets HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"keyword\":\"Birth control\""));
}
