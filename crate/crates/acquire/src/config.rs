use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use semrich::Iri;

use crate::AcquireError;

/// One SPARQL endpoint and how politely to crawl it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(default = "default_page_size")]
    pub page_size: u64,
    /// Entities kept after sampling.
    #[serde(default = "default_max_entities")]
    pub max_entities: u64,
    /// Candidates listed before sampling; defaults to `10 × max_entities`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crawl_bound: Option<u64>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Base delay between retries, multiplied by the attempt number.
    #[serde(default = "default_retry_backoff_ms")]
    pub retry_backoff_ms: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Minimum spacing between request starts.
    #[serde(default = "default_politeness_ms")]
    pub politeness_delay_ms: u64,
}

fn default_page_size() -> u64 {
    1000
}
fn default_max_entities() -> u64 {
    1000
}
fn default_timeout_ms() -> u64 {
    30_000
}
fn default_max_retries() -> u32 {
    3
}
fn default_retry_backoff_ms() -> u64 {
    500
}
fn default_parallelism() -> usize {
    4
}
fn default_politeness_ms() -> u64 {
    100
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointConfig {
            url: url.into(),
            page_size: default_page_size(),
            max_entities: default_max_entities(),
            crawl_bound: None,
            timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            retry_backoff_ms: default_retry_backoff_ms(),
            parallelism: default_parallelism(),
            politeness_delay_ms: default_politeness_ms(),
        }
    }

    pub fn crawl_bound(&self) -> u64 {
        self.crawl_bound.unwrap_or(self.max_entities.saturating_mul(10))
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn politeness_delay(&self) -> Duration {
        Duration::from_millis(self.politeness_delay_ms)
    }

    pub fn validate(&self) -> Result<(), AcquireError> {
        let bad = |msg: &str| Err(AcquireError::Config(format!("{}: {msg}", self.url)));
        if Iri::new(&self.url).is_err() || !(self.url.starts_with("http://") || self.url.starts_with("https://")) {
            return bad("url must be an absolute http(s) IRI");
        }
        if self.page_size == 0 || self.max_entities == 0 {
            return bad("page_size and max_entities must be positive");
        }
        if self.page_size > self.max_entities.max(self.crawl_bound()) {
            return bad("page_size exceeds the crawl bound");
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CacheMode {
    /// Use cached listings and entities when present; fetch the rest.
    #[default]
    Prefer,
    /// Always hit the network and overwrite the cache.
    Refresh,
    /// Never hit the network; missing entries become failures.
    Offline,
}

/// The `fetch` command's config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchConfig {
    pub cache_dir: PathBuf,
    pub concept: Iri,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cache_mode: CacheMode,
    pub endpoints: Vec<EndpointConfig>,
}
