//! Links statistical indicators to historical events.
//!
//! The pipeline maps each indicator to an encyclopedia concept, expands the
//! concept into related keywords scored by hit-count relatedness, and
//! gathers the events whose descriptions mention any keyword within the
//! indicator's years. Modules:
//!
//! * [`stats`]: indicator catalog, year slices and country series
//! * [`corpus`]: encyclopedia/linked-data client with record/replay fixtures
//! * [`relatedness`]: candidate harvesting and relatedness scoring
//! * [`events`]: historical events store and keyword search
//! * [`timeline`]: per-indicator timelines and batch builds
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod corpus;
pub mod events;
pub mod relatedness;
pub mod scalar;
pub mod stats;
pub mod timeline;

pub use scalar::Scalar;

pub type Catalog = stats::Catalog<f64>;
pub type YearSlice = stats::YearSlice<f64>;
pub type CountrySeries = stats::CountrySeries<f64>;
pub type Observation = stats::Observation<f64>;
pub type ConceptCandidate = relatedness::ConceptCandidate<f64>;
pub type ExpansionConfig = relatedness::ExpansionConfig<f64>;
pub type Expansion = relatedness::Expansion<f64>;
pub type BuildOptions = timeline::BuildOptions<f64>;

/// Distance between two concepts from their hit counts, in `f64`.
pub fn ngd(a_hits: u64, b_hits: u64, co_hits: u64, w_total: u64) -> Result<f64, relatedness::ScoreError> {
    relatedness::ngd(a_hits, b_hits, co_hits, w_total)
}

/// Relatedness in `[0, 1]` from hit counts, in `f64`.
pub fn sr_score(a_hits: u64, b_hits: u64, co_hits: u64, w_total: u64) -> Result<f64, relatedness::ScoreError> {
    relatedness::sr_score(a_hits, b_hits, co_hits, w_total)
}
