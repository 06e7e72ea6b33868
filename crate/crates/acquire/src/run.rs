use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use semrich::{sample_entities, Graph, Iri};

use crate::cache::{assemble, Cache, CandidateListing, FailedEntity, RunManifest};
use crate::client::SparqlClient;
use crate::config::{CacheMode, FetchConfig};
use crate::AcquireError;

/// Cache-aware single-entity fetch. A cache hit in `Prefer` or `Offline`
/// mode issues no request.
pub fn fetch_entity(
    client: &SparqlClient,
    cache: &Cache,
    concept: &Iri,
    entity: &Iri,
    mode: CacheMode,
) -> Result<Graph, AcquireError> {
    let endpoint = client.config().url.as_str();
    if mode != CacheMode::Refresh && cache.has_entity(endpoint, concept, entity) {
        return cache.read_entity(endpoint, concept, entity);
    }
    if mode == CacheMode::Offline {
        return Err(AcquireError::NotCached(entity.to_string()));
    }
    let (_, graph) = client.fetch_outgoing(entity)?;
    cache.write_entity(endpoint, concept, entity, &graph)?;
    Ok(graph)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub graph: Graph,
    /// Requests issued by this run.
    pub requests: u64,
    pub retries: u64,
}

/// List, sample, fetch and assemble one endpoint's view of `concept`.
///
/// At most `parallelism` fetches are in flight; request starts are spaced
/// by the politeness delay. Per-entity failures are recorded in the
/// manifest and do not stop the run. The manifest is only written when
/// the run completes.
pub fn run_acquisition(
    client: &SparqlClient,
    cache: &Cache,
    concept: &Iri,
    seed: u64,
    mode: CacheMode,
) -> Result<RunOutcome, AcquireError> {
    let config = client.config();
    let endpoint = config.url.as_str();
    let requests_before = client.request_count();
    let retries_before = client.retry_count();

    let cached_listing = match mode {
        CacheMode::Refresh => None,
        _ => cache.read_listing(endpoint, concept)?,
    };
    let listing = match cached_listing {
        Some(listing) => listing,
        None if mode == CacheMode::Offline => {
            return Err(AcquireError::NotCached(format!("entity listing for {concept}")))
        }
        None => {
            let fetched = client.list_entities(concept)?;
            let listing = CandidateListing {
                entities: fetched.entities.iter().filter_map(|t| t.as_iri().cloned()).collect(),
                skipped_non_iri: fetched.skipped,
            };
            cache.write_listing(endpoint, concept, &listing)?;
            listing
        }
    };

    let sampled: Vec<Iri> = sample_entities(&listing.entities, config.max_entities as usize, seed);

    let next = AtomicUsize::new(0);
    let failures: Mutex<Vec<(usize, FailedEntity)>> = Mutex::new(Vec::new());
    let workers = config.parallelism.min(sampled.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(entity) = sampled.get(i) else { break };
                if let Err(e) = fetch_entity(client, cache, concept, entity, mode) {
                    log::warn!("{endpoint}: {entity}: {e}");
                    failures.lock().expect("failure list").push((
                        i,
                        FailedEntity {
                            entity: entity.clone(),
                            error: e.to_string(),
                        },
                    ));
                }
            });
        }
    });
    let mut failures = failures.into_inner().expect("failure list");
    failures.sort_by_key(|(i, _)| *i);

    let manifest = RunManifest {
        endpoint: endpoint.to_owned(),
        concept: concept.clone(),
        seed,
        max_entities: config.max_entities,
        crawl_bound: config.crawl_bound(),
        candidates: listing.entities.len() as u64,
        skipped_non_iri: listing.skipped_non_iri,
        entities: sampled,
        failures: failures.into_iter().map(|(_, f)| f).collect(),
    };
    cache.write_manifest(&manifest)?;
    let graph = assemble(cache, &manifest)?;
    Ok(RunOutcome {
        manifest,
        graph,
        requests: client.request_count() - requests_before,
        retries: client.retry_count() - retries_before,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndpointReport {
    pub endpoint: String,
    pub entities: usize,
    pub failures: usize,
    pub requests: u64,
    pub retries: u64,
    /// Set when the endpoint produced no manifest at all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FetchReport {
    pub concept: Iri,
    pub seed: u64,
    pub endpoints: Vec<EndpointReport>,
}

impl FetchReport {
    pub fn all_failed(&self) -> bool {
        !self.endpoints.is_empty() && self.endpoints.iter().all(|e| e.error.is_some())
    }
}

/// Runs every endpoint of the config in turn. An endpoint that fails
/// outright leaves any earlier manifest in place and is reported, not
/// propagated.
pub fn run_fetch(config: &FetchConfig) -> Result<FetchReport, AcquireError> {
    for endpoint in &config.endpoints {
        endpoint.validate()?;
    }
    let cache = Cache::new(&config.cache_dir);
    let mut endpoints = Vec::with_capacity(config.endpoints.len());
    for endpoint in &config.endpoints {
        let client = SparqlClient::new(endpoint.clone())?;
        let report = match run_acquisition(&client, &cache, &config.concept, config.seed, config.cache_mode) {
            Ok(outcome) => EndpointReport {
                endpoint: endpoint.url.clone(),
                entities: outcome.manifest.entities.len(),
                failures: outcome.manifest.failures.len(),
                requests: outcome.requests,
                retries: outcome.retries,
                error: None,
            },
            Err(e) => {
                log::error!("{}: {e}", endpoint.url);
                EndpointReport {
                    endpoint: endpoint.url.clone(),
                    entities: 0,
                    failures: 0,
                    requests: client.request_count(),
                    retries: client.retry_count(),
                    error: Some(e.to_string()),
                }
            }
        };
        endpoints.push(report);
    }
    Ok(FetchReport {
        concept: config.concept.clone(),
        seed: config.seed,
        endpoints,
    })
}
