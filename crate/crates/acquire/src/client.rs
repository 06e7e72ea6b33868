//! Blocking SPARQL protocol client: paged SELECT for entity listing and
//! outgoing-only CONSTRUCT per entity.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;

use semrich::rdf::{parse_ntriples_str, ParseOptions, TermRepr};
use semrich::{Graph, Iri, Term};

use crate::config::EndpointConfig;
use crate::AcquireError;

const ACCEPT_RESULTS_JSON: &str = "application/sparql-results+json";
const ACCEPT_NTRIPLES: &str = "application/n-triples, text/plain;q=0.5";

/// Spaces out request starts by at least `delay`.
struct Throttle {
    delay: Duration,
    next_start: Mutex<Option<Instant>>,
}

impl Throttle {
    fn wait(&self) {
        let start = {
            let mut next = self.next_start.lock().expect("throttle lock");
            let now = Instant::now();
            let start = next.map_or(now, |n| n.max(now));
            *next = Some(start + self.delay);
            start
        };
        let now = Instant::now();
        if start > now {
            thread::sleep(start - now);
        }
    }
}

pub struct SparqlClient {
    config: EndpointConfig,
    agent: ureq::Agent,
    throttle: Throttle,
    requests: AtomicU64,
    retries: AtomicU64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityListing {
    pub entities: Vec<Term>,
    /// Bindings that were not IRIs.
    pub skipped: u64,
}

#[derive(Deserialize)]
struct SelectResults {
    results: SelectBindings,
}

#[derive(Deserialize)]
struct SelectBindings {
    bindings: Vec<std::collections::BTreeMap<String, TermRepr>>,
}

impl SparqlClient {
    pub fn new(config: EndpointConfig) -> Result<Self, AcquireError> {
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout()))
            .http_status_as_error(false)
            .user_agent(concat!("semrich/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        Ok(SparqlClient {
            throttle: Throttle {
                delay: config.politeness_delay(),
                next_start: Mutex::new(None),
            },
            config,
            agent,
            requests: AtomicU64::new(0),
            retries: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// HTTP requests issued so far, retries included.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn retry_count(&self) -> u64 {
        self.retries.load(Ordering::SeqCst)
    }

    fn query(&self, sparql: &str, accept: &str) -> Result<String, AcquireError> {
        let mut attempt = 0u32;
        loop {
            self.throttle.wait();
            self.requests.fetch_add(1, Ordering::SeqCst);
            let outcome = self
                .agent
                .get(&self.config.url)
                .query("query", sparql)
                .header("Accept", accept)
                .call();
            let failure = match outcome {
                Ok(mut response) => {
                    let status = response.status().as_u16();
                    if (200..300).contains(&status) {
                        return response
                            .body_mut()
                            .read_to_string()
                            .map_err(|e| AcquireError::Http(format!("{}: reading body: {e}", self.config.url)));
                    }
                    let retryable = status >= 500 || status == 429;
                    let err = AcquireError::Http(format!("{}: HTTP {status}", self.config.url));
                    if !retryable {
                        return Err(err);
                    }
                    err
                }
                Err(e) => AcquireError::Http(format!("{}: {e}", self.config.url)),
            };
            if attempt >= self.config.max_retries {
                return Err(failure);
            }
            attempt += 1;
            self.retries.fetch_add(1, Ordering::SeqCst);
            log::warn!("retry {attempt}/{} after {failure}", self.config.max_retries);
            thread::sleep(Duration::from_millis(self.config.retry_backoff_ms * attempt as u64));
        }
    }

    /// Lists members of `concept` page by page (`LIMIT`/`OFFSET`) until a
    /// short page or the crawl bound. Order is whatever the endpoint returns.
    pub fn list_entities(&self, concept: &Iri) -> Result<EntityListing, AcquireError> {
        let bound = self.config.crawl_bound();
        let mut listing = EntityListing::default();
        let mut offset = 0u64;
        while (listing.entities.len() as u64) < bound {
            let limit = self.config.page_size.min(bound - listing.entities.len() as u64);
            let sparql = select_members_query(concept, limit, offset);
            let body = self.query(&sparql, ACCEPT_RESULTS_JSON)?;
            let parsed: SelectResults = serde_json::from_str(&body)
                .map_err(|e| AcquireError::MalformedResults(format!("{}: {e}", self.config.url)))?;
            let rows = parsed.results.bindings.len() as u64;
            for mut row in parsed.results.bindings {
                match row.remove("e").map(Term::try_from) {
                    Some(Ok(term @ Term::Iri(_))) => listing.entities.push(term),
                    _ => listing.skipped += 1,
                }
            }
            if rows < limit {
                break;
            }
            offset += rows;
        }
        listing.entities.truncate(bound as usize);
        Ok(listing)
    }

    /// The entity's outgoing triples. Anything not about `entity` is dropped.
    pub fn fetch_outgoing(&self, entity: &Iri) -> Result<(String, Graph), AcquireError> {
        let body = self.query(&construct_outgoing_query(entity), ACCEPT_NTRIPLES)?;
        let parsed = parse_ntriples_str(&body, &ParseOptions::strict())
            .map_err(|e| AcquireError::MalformedResults(format!("{}: {e}", self.config.url)))?;
        let subject = Term::Iri(entity.clone());
        let graph = Graph::from_triples(parsed.graph.iter().filter(|t| t.subject() == &subject).cloned());
        Ok((body, graph))
    }
}

pub fn select_members_query(concept: &Iri, limit: u64, offset: u64) -> String {
    format!("SELECT DISTINCT ?e WHERE {{ ?e a {concept} }} LIMIT {limit} OFFSET {offset}")
}

pub fn construct_outgoing_query(entity: &Iri) -> String {
    format!("CONSTRUCT {{ {entity} ?p ?o }} WHERE {{ {entity} ?p ?o }}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_text() {
        let c = Iri::new("http://xmlns.com/foaf/0.1/Person").unwrap();
        assert_eq!(
            select_members_query(&c, 10, 20),
            "SELECT DISTINCT ?e WHERE { ?e a <http://xmlns.com/foaf/0.1/Person> } LIMIT 10 OFFSET 20"
        );
        let e = Iri::new("http://ex.org/e1").unwrap();
        assert_eq!(
            construct_outgoing_query(&e),
            "CONSTRUCT { <http://ex.org/e1> ?p ?o } WHERE { <http://ex.org/e1> ?p ?o }"
        );
    }

    #[test]
    fn throttle_spaces_starts() {
        let t = Throttle {
            delay: Duration::from_millis(20),
            next_start: Mutex::new(None),
        };
        let begin = Instant::now();
        for _ in 0..4 {
            t.wait();
        }
        assert!(begin.elapsed() >= Duration::from_millis(60));
    }
}
