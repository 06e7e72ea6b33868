//! Sampling concept members from SPARQL endpoints into a reproducible
//! on-disk cache.

pub mod cache;
pub mod client;
pub mod config;
pub mod mock;
pub mod run;

pub use cache::{assemble, digest, load_concept_dir, Cache, CacheEntry, FailedEntity, RunManifest};
pub use client::{construct_outgoing_query, select_members_query, EntityListing, SparqlClient};
pub use config::{CacheMode, EndpointConfig, FetchConfig};
pub use run::{fetch_entity, run_acquisition, run_fetch, EndpointReport, FetchReport, RunOutcome};
pub use semrich::sample_entities;

#[derive(Debug, thiserror::Error)]
pub enum AcquireError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("request failed: {0}")]
    Http(String),
    #[error("malformed results: {0}")]
    MalformedResults(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("not cached (offline mode): {0}")]
    NotCached(String),
}
