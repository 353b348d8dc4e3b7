//! Read-only JSON API over a [`Snapshot`].

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use axum::extract::{Path as UrlPath, Query, State};
use axum::handler::HandlerWithoutStateExt;
use axum::http::{StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use statlink_core::corpus::normalize_term;
use statlink_core::events::EventDate;
use statlink_core::stats::Indicator;
use statlink_core::timeline::{Facet, TimelineDoc, TimelineEvent, TimelineKeyword};
use statlink_core::YearSlice;
use tower_http::services::ServeDir;

use crate::state::{AppState, Snapshot};

pub const DEFAULT_SEARCH_LIMIT: usize = 10;
pub const MAX_SEARCH_LIMIT: usize = 100;
/// Smallest circle radius, so the lowest value stays visible.
pub const RADIUS_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub status: u16,
    pub error: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn not_found(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::NOT_FOUND, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { status: self.status.as_u16(), error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Params = Query<HashMap<String, String>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorDetail {
    #[serde(flatten)]
    pub indicator: Indicator,
    pub years_with_data: Vec<i32>,
    pub value_min: Option<f64>,
    pub value_max: Option<f64>,
    pub has_timeline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub country: String,
    pub name: String,
    pub value: f64,
    pub above_median: bool,
    pub radius_norm: f64,
    pub color_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceResponse {
    pub indicator_id: String,
    pub year: i32,
    pub rows: Vec<SliceRow>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub year: i32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub country: String,
    pub name: String,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResponse {
    pub indicator_id: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineResponse {
    pub indicator_id: String,
    pub concept: String,
    pub keyword: Option<String>,
    pub from: Option<i32>,
    pub to: Option<i32>,
    pub keywords: Vec<TimelineKeyword>,
    pub events: Vec<TimelineEvent>,
    pub facets: Vec<Facet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetsResponse {
    pub indicator_id: String,
    pub facets: Vec<Facet>,
}

/// Attach rendering metadata to a slice. `range` is the indicator's global
/// (min, max) over all years.
pub fn slice_response(slice: &YearSlice, range: Option<(f64, f64)>) -> SliceResponse {
    let (lo, hi) = range.unwrap_or((0.0, 0.0));
    let span = hi - lo;
    let rows = slice
        .rows
        .iter()
        .map(|row| {
            let shifted = row.value - lo;
            let (radius_norm, color_norm) = if span > 0.0 {
                ((shifted / span).clamp(0.0, 1.0).sqrt().max(RADIUS_FLOOR), (shifted / span).clamp(0.0, 1.0))
            } else {
                (1.0, 0.5)
            };
            SliceRow {
                country: row.country.as_str().to_string(),
                name: row.country.display_name().to_string(),
                value: row.value,
                above_median: slice.median.is_some_and(|m| row.value > m),
                radius_norm,
                color_norm,
            }
        })
        .collect();
    SliceResponse {
        indicator_id: slice.indicator_id.clone(),
        year: slice.year,
        rows,
        min: slice.min,
        max: slice.max,
        median: slice.median,
    }
}

/// A timeline restricted to one facet keyword (case-insensitive) and a
/// year window. The facet list is always the full one.
pub fn filter_timeline(
    doc: &TimelineDoc,
    keyword: Option<&str>,
    from: Option<i32>,
    to: Option<i32>,
) -> TimelineResponse {
    let wanted = keyword.map(normalize_term);
    let events = doc
        .events
        .iter()
        .filter(|e| from.is_none_or(|f| e.year() >= f) && to.is_none_or(|t| e.year() <= t))
        .filter(|e| wanted.as_ref().is_none_or(|w| e.matched_keywords.iter().any(|k| normalize_term(k) == *w)))
        .cloned()
        .collect();
    TimelineResponse {
        indicator_id: doc.indicator_id.clone(),
        concept: doc.concept.clone(),
        keyword: keyword.map(str::to_string),
        from,
        to,
        keywords: doc.keywords.clone(),
        events,
        facets: doc.facets.clone(),
    }
}

fn param<T: FromStr>(params: &HashMap<String, String>, name: &str) -> Result<Option<T>, ApiError> {
    match params.get(name).map(|s| s.trim()).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(raw) => raw.parse().map(Some).map_err(|_| ApiError::bad_request(format!("invalid `{name}`: `{raw}`"))),
    }
}

/// Years may be given as plain integers or as event-style dates.
fn year_param(params: &HashMap<String, String>, name: &str) -> Result<Option<i32>, ApiError> {
    if let Ok(v) = param::<i32>(params, name) {
        return Ok(v);
    }
    param::<EventDate>(params, name).map(|d| d.map(|d| d.year))
}

fn indicator<'a>(snap: &'a Snapshot, id: &str) -> Result<&'a Indicator, ApiError> {
    snap.catalog.indicator(id).ok_or_else(|| ApiError::not_found(format!("unknown indicator `{id}`")))
}

fn timeline<'a>(snap: &'a Snapshot, id: &str) -> Result<&'a TimelineDoc, ApiError> {
    indicator(snap, id)?;
    snap.timelines.get(id).ok_or_else(|| ApiError::not_found(format!("no timeline built for `{id}`")))
}

async fn health() -> Json<Health> {
    Json(Health { status: "ok".into() })
}

async fn search(State(state): State<AppState>, Query(params): Params) -> ApiResult<Vec<Indicator>> {
    let limit = param::<usize>(&params, "limit")?.unwrap_or(DEFAULT_SEARCH_LIMIT);
    if limit == 0 || limit > MAX_SEARCH_LIMIT {
        return Err(ApiError::bad_request(format!("`limit` must be in 1..={MAX_SEARCH_LIMIT}")));
    }
    let query = params.get("q").map(String::as_str).unwrap_or("");
    let snap = state.snapshot();
    Ok(Json(snap.catalog.search_titles(query, limit).into_iter().cloned().collect()))
}

async fn detail(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<IndicatorDetail> {
    let snap = state.snapshot();
    let indicator = indicator(&snap, &id)?.clone();
    let range = snap.catalog.value_range(&id).map_err(|e| ApiError::not_found(e.to_string()))?;
    Ok(Json(IndicatorDetail {
        years_with_data: snap.catalog.years_with_data(&id).map_err(|e| ApiError::not_found(e.to_string()))?,
        value_min: range.map(|r| r.0),
        value_max: range.map(|r| r.1),
        has_timeline: snap.timelines.contains_key(&id),
        indicator,
    }))
}

async fn slice(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(params): Params,
) -> ApiResult<SliceResponse> {
    let snap = state.snapshot();
    indicator(&snap, &id)?;
    let year = year_param(&params, "year")?.ok_or_else(|| ApiError::bad_request("`year` is required"))?;
    let slice = snap.catalog.year_slice(&id, year).map_err(|e| ApiError::not_found(e.to_string()))?;
    let range = snap.catalog.value_range(&id).map_err(|e| ApiError::not_found(e.to_string()))?;
    Ok(Json(slice_response(&slice, range)))
}

async fn series(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(params): Params,
) -> ApiResult<SeriesResponse> {
    let snap = state.snapshot();
    indicator(&snap, &id)?;
    let countries: Vec<String> = params
        .get("countries")
        .map(|s| s.split(',').map(|c| c.trim().to_ascii_uppercase()).filter(|c| !c.is_empty()).collect())
        .unwrap_or_default();
    let series = snap.catalog.country_series(&id, &countries).map_err(|e| ApiError::not_found(e.to_string()))?;
    let series = series
        .into_iter()
        .map(|s| Series {
            name: statlink_core::stats::country_name(&s.country).unwrap_or(&s.country).to_string(),
            country: s.country,
            points: s.points.into_iter().map(|(year, value)| SeriesPoint { year, value }).collect(),
        })
        .collect();
    Ok(Json(SeriesResponse { indicator_id: id, series }))
}

async fn timeline_handler(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(params): Params,
) -> ApiResult<TimelineResponse> {
    let snap = state.snapshot();
    let doc = timeline(&snap, &id)?;
    let from = year_param(&params, "from")?;
    let to = year_param(&params, "to")?;
    if let (Some(f), Some(t)) = (from, to) {
        if f > t {
            return Err(ApiError::bad_request(format!("`from` ({f}) is after `to` ({t})")));
        }
    }
    let keyword = params.get("keyword").map(|k| k.trim()).filter(|k| !k.is_empty());
    Ok(Json(filter_timeline(doc, keyword, from, to)))
}

async fn facets(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<FacetsResponse> {
    let snap = state.snapshot();
    let doc = timeline(&snap, &id)?;
    Ok(Json(FacetsResponse { indicator_id: id, facets: doc.facets.clone() }))
}

async fn not_found(uri: Uri) -> ApiError {
    ApiError::not_found(format!("no route for {}", uri.path()))
}

async fn method_not_allowed() -> ApiError {
    ApiError { status: StatusCode::METHOD_NOT_ALLOWED, message: "only GET is supported".into() }
}

/// The full application. Paths outside `/api` and `/healthz` are served
/// from `static_dir` when one is given.
pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/statistics", get(search))
        .route("/statistics/{id}", get(detail))
        .route("/statistics/{id}/slice", get(slice))
        .route("/statistics/{id}/series", get(series))
        .route("/statistics/{id}/timeline", get(timeline_handler))
        .route("/statistics/{id}/facets", get(facets))
        .fallback(not_found);
    let app =
        Router::new().route("/healthz", get(health)).nest("/api", api).method_not_allowed_fallback(method_not_allowed);
    let app = match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir).not_found_service(not_found.into_service())),
        None => app.fallback(not_found),
    };
    app.with_state(state)
}
