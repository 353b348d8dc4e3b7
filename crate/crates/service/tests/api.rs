mod common;

use axum::http::StatusCode;
use serde_json::{json, Value};
use statlink::api::{router, RADIUS_FLOOR};
use statlink::state::{AppState, Snapshot};
use statlink_core::Catalog;

use common::{build_sample, get, schema, violations};

fn sample_app() -> (tempfile::TempDir, AppState, axum::Router) {
    let dir = tempfile::tempdir().unwrap();
    build_sample(dir.path());
    let state = AppState::from_build_dir(dir.path()).unwrap();
    let app = router(state.clone(), None);
    (dir, state, app)
}

fn snapshot(observations: &str) -> Snapshot {
    let catalog = "indicator_id,source,title,unit,year_min,year_max\nx,custom,Synthetic,,1990,2010\n";
    let catalog =
        Catalog::from_readers(catalog.as_bytes(), "catalog.csv", observations.as_bytes(), "observations.csv").unwrap();
    Snapshot { catalog, timelines: Default::default() }
}

#[tokio::test]
async fn health_and_search() {
    let (_dir, _, app) = sample_app();
    assert_eq!(get(&app, "/healthz").await, (StatusCode::OK, json!({"status": "ok"})));

    let (status, body) = get(&app, "/api/statistics?q=fert").await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<&str> = body.as_array().unwrap().iter().map(|i| i["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["tfr"]);
    assert_eq!(get(&app, "/api/statistics?q=").await.1, json!([]));
    assert_eq!(get(&app, "/api/statistics?q=a&limit=0").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/api/statistics?q=a&limit=x").await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_things_are_json_404s() {
    let (_dir, _, app) = sample_app();
    let errors = schema("error");
    for uri in [
        "/api/statistics/unknown",
        "/api/statistics/unknown/slice?year=2000",
        "/api/nope",
        "/nope",
        "/api/statistics/agriculture_gdp/timeline",
    ] {
        let (status, body) = get(&app, uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert!(violations(&errors, &body).is_empty(), "{uri}: {body}");
        assert_eq!(body["status"], 404);
    }
}

#[tokio::test]
async fn indicator_detail() {
    let (_dir, _, app) = sample_app();
    let (status, body) = get(&app, "/api/statistics/tfr").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["title"], "Children per woman (total fertility)");
    assert_eq!(body["has_timeline"], true);
    assert_eq!(body["years_with_data"].as_array().unwrap().len(), 214);
    assert!(violations(&schema("indicator"), &body).is_empty());
    assert_eq!(get(&app, "/api/statistics/agriculture_gdp").await.1["has_timeline"], false);
}

#[tokio::test]
async fn two_country_normalization() {
    let obs = "indicator_id,country,year,value\nx,AAA,2000,10\nx,BBB,2000,30\nx,AAA,1990,0\nx,BBB,1990,40\n";
    let app = router(AppState::new(snapshot(obs)), None);
    let (status, body) = get(&app, "/api/statistics/x/slice?year=2000").await;
    assert_eq!(status, StatusCode::OK);
    let rows = body["rows"].as_array().unwrap();
    assert_eq!(rows[0]["country"], "BBB");
    assert_eq!(rows[0]["color_norm"], 0.75);
    assert_eq!(rows[1]["color_norm"], 0.25);
    assert_eq!(rows[0]["above_median"], true);
    assert_eq!(rows[1]["above_median"], false);
    assert_eq!(body["median"], 20.0);
    let r = |i: usize| rows[i]["radius_norm"].as_f64().unwrap();
    assert!((r(0) - 0.75f64.sqrt()).abs() < 1e-12 && (r(1) - 0.5).abs() < 1e-12);

    let low = get(&app, "/api/statistics/x/slice?year=1990").await.1;
    assert_eq!(low["rows"][1]["radius_norm"], RADIUS_FLOOR);
    assert_eq!(low["rows"][0]["radius_norm"], 1.0);
}

#[tokio::test]
async fn constant_indicator_and_empty_year() {
    let obs = "indicator_id,country,year,value\nx,AAA,2000,7\nx,BBB,2000,7\nx,CCC,2001,7\n";
    let app = router(AppState::new(snapshot(obs)), None);
    let body = get(&app, "/api/statistics/x/slice?year=2000").await.1;
    for row in body["rows"].as_array().unwrap() {
        assert_eq!(row["color_norm"], 0.5);
        assert_eq!(row["above_median"], false);
        assert_eq!(row["radius_norm"], 1.0);
    }
    let (status, empty) = get(&app, "/api/statistics/x/slice?year=1995").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(empty["rows"], json!([]));
    assert!(empty["median"].is_null());
    let (status, outside) = get(&app, "/api/statistics/x/slice?year=1700").await;
    assert_eq!((status, outside["rows"].clone()), (StatusCode::OK, json!([])));
    assert_eq!(get(&app, "/api/statistics/x/slice").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/api/statistics/x/slice?year=soon").await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn series_endpoint() {
    let (_dir, _, app) = sample_app();
    let body = get(&app, "/api/statistics/tfr/series?countries=GBR,gbr%20,ZZZ").await.1;
    assert!(violations(&schema("series"), &body).is_empty());
    let series = body["series"].as_array().unwrap();
    assert_eq!(series[0]["name"], "United Kingdom");
    assert_eq!(series[0]["points"].as_array().unwrap().len(), 214);
    assert_eq!(series[2]["points"], json!([]));
    assert_eq!(get(&app, "/api/statistics/tfr/series").await.1["series"], json!([]));
}

fn event_years(body: &Value) -> Vec<i64> {
    body["events"].as_array().unwrap().iter().map(|e| e["date"].as_str().unwrap()[..4].parse().unwrap()).collect()
}

#[tokio::test]
async fn timeline_filters() {
    let (_dir, _, app) = sample_app();
    let full = get(&app, "/api/statistics/tfr/timeline").await.1;
    assert_eq!(full["events"].as_array().unwrap().len(), 33);
    assert_eq!(full["keywords"][0]["label"], "Fertility");

    let contra = get(&app, "/api/statistics/tfr/timeline?keyword=contraception").await.1;
    let events = contra["events"].as_array().unwrap();
    assert!(!events.is_empty());
    for e in events {
        assert!(e["matched_keywords"].as_array().unwrap().contains(&json!("Contraception")));
    }
    assert_eq!(contra["facets"], full["facets"]);

    let window = get(&app, "/api/statistics/tfr/timeline?from=1920&to=1940").await.1;
    let years = event_years(&window);
    assert!(!years.is_empty() && years.iter().all(|y| (1920..=1940).contains(y)));

    let (status, none) = get(&app, "/api/statistics/tfr/timeline?keyword=Banana").await;
    assert_eq!((status, none["events"].clone()), (StatusCode::OK, json!([])));
    assert_eq!(get(&app, "/api/statistics/tfr/timeline?from=1950&to=1900").await.0, StatusCode::BAD_REQUEST);

    let facets = get(&app, "/api/statistics/tfr/facets").await.1;
    assert_eq!(facets["facets"], full["facets"]);
    assert!(violations(&schema("facets"), &facets).is_empty());
    for body in [&full, &contra, &window, &none] {
        assert!(violations(&schema("timeline"), body).is_empty());
    }
}

#[tokio::test]
async fn snapshot_swap_is_atomic_per_request() {
    let (_dir, state, app) = sample_app();
    assert_eq!(get(&app, "/api/statistics/x").await.0, StatusCode::NOT_FOUND);
    state.replace(snapshot("indicator_id,country,year,value\nx,AAA,2000,1\n"));
    assert_eq!(get(&app, "/api/statistics/x").await.0, StatusCode::OK);
    assert_eq!(get(&app, "/api/statistics/tfr").await.0, StatusCode::NOT_FOUND);
    state.reload().unwrap();
    assert_eq!(get(&app, "/api/statistics/tfr").await.0, StatusCode::OK);
}

#[tokio::test]
async fn static_assets_and_methods() {
    let dir = tempfile::tempdir().unwrap();
    build_sample(dir.path());
    let assets = tempfile::tempdir().unwrap();
    std::fs::write(assets.path().join("index.html"), "<!doctype html><title>explorer</title>").unwrap();
    let app = router(AppState::from_build_dir(dir.path()).unwrap(), Some(assets.path()));
    let (status, body) = get(&app, "/index.html").await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.as_str().unwrap().contains("explorer"));
    let (status, body) = get(&app, "/missing.js").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["status"], 404);
    assert_eq!(get(&app, "/api/nope").await.1["status"], 404);

    use tower::ServiceExt;
    let req = axum::http::Request::post("/healthz").body(axum::body::Body::empty()).unwrap();
    assert_eq!(app.oneshot(req).await.unwrap().status(), StatusCode::METHOD_NOT_ALLOWED);
}

#[test]
fn missing_build_dir_is_a_startup_error() {
    let err = AppState::from_build_dir("/definitely/not/here").unwrap_err();
    assert!(err.to_string().contains("does not exist"));
}
