//! HTTP API and command line for the statistics/events pipeline.

pub mod api;
pub mod cli;
pub mod state;
