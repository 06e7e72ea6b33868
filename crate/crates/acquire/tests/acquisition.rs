use std::collections::BTreeSet;
use std::fs;

use semrich::{build_profile, Graph, Iri, Term};
use semrich_acquire::mock::{dead_endpoint_url, MockData, MockServer};
use semrich_acquire::{
    assemble, fetch_entity, load_concept_dir, run_acquisition, run_fetch, sample_entities, Cache, CacheMode,
    EndpointConfig, FetchConfig, SparqlClient,
};

fn concept() -> Iri {
    Iri::new("http://xmlns.com/foaf/0.1/Person").unwrap()
}

fn fast_config(url: String) -> EndpointConfig {
    EndpointConfig {
        politeness_delay_ms: 0,
        retry_backoff_ms: 5,
        timeout_ms: 5_000,
        ..EndpointConfig::new(url)
    }
}

#[test]
fn empty_endpoint_lists_nothing() {
    let server = MockServer::start(MockData::default()).unwrap();
    let client = SparqlClient::new(fast_config(server.url())).unwrap();
    let listing = client.list_entities(&concept()).unwrap();
    assert!(listing.entities.is_empty());
    assert_eq!(server.requests(), 1);
}

#[test]
fn paging_25_entities_by_10() {
    let server = MockServer::start(MockData::uniform("http://ex.org/e", 25, 1)).unwrap();
    let client = SparqlClient::new(EndpointConfig {
        page_size: 10,
        ..fast_config(server.url())
    })
    .unwrap();
    let listing = client.list_entities(&concept()).unwrap();
    assert_eq!(server.requests(), 3);
    assert_eq!(listing.entities.len(), 25);
    let expected: Vec<Term> = (0..25).map(|k| Term::iri(format!("http://ex.org/e{k}")).unwrap()).collect();
    assert_eq!(listing.entities, expected, "endpoint order is kept");
}

#[test]
fn non_iri_bindings_are_skipped_and_counted() {
    let server = MockServer::start(MockData {
        non_iri_members: 3,
        ..MockData::uniform("http://ex.org/e", 4, 1)
    })
    .unwrap();
    let client = SparqlClient::new(fast_config(server.url())).unwrap();
    let listing = client.list_entities(&concept()).unwrap();
    assert_eq!(listing.entities.len(), 4);
    assert_eq!(listing.skipped, 3);
}

#[test]
fn crawl_bound_truncates_listing() {
    let server = MockServer::start(MockData::uniform("http://ex.org/e", 40, 1)).unwrap();
    let client = SparqlClient::new(EndpointConfig {
        page_size: 10,
        max_entities: 5,
        crawl_bound: Some(15),
        ..fast_config(server.url())
    })
    .unwrap();
    let listing = client.list_entities(&concept()).unwrap();
    assert_eq!(listing.entities.len(), 15);
    assert_eq!(server.requests(), 2);
}

#[test]
fn two_failures_then_success_with_three_retries() {
    let server = MockServer::start(MockData {
        fail_first: 2,
        ..MockData::uniform("http://ex.org/e", 5, 1)
    })
    .unwrap();
    let client = SparqlClient::new(EndpointConfig {
        max_retries: 3,
        ..fast_config(server.url())
    })
    .unwrap();
    let listing = client.list_entities(&concept()).unwrap();
    assert_eq!(listing.entities.len(), 5);
    assert_eq!(client.retry_count(), 2);
    assert_eq!(server.requests(), 3);
}

#[test]
fn retries_exhausted_is_an_error() {
    let server = MockServer::start(MockData {
        fail_first: 10,
        ..MockData::default()
    })
    .unwrap();
    let client = SparqlClient::new(EndpointConfig {
        max_retries: 2,
        ..fast_config(server.url())
    })
    .unwrap();
    assert!(client.list_entities(&concept()).is_err());
    assert_eq!(server.requests(), 3);
}

#[test]
fn entity_with_four_triples_is_persisted_canonically() {
    let server = MockServer::start(MockData::uniform("http://ex.org/e", 1, 4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let client = SparqlClient::new(fast_config(server.url())).unwrap();
    let e = Iri::new("http://ex.org/e0").unwrap();
    let graph = fetch_entity(&client, &cache, &concept(), &e, CacheMode::Prefer).unwrap();
    assert_eq!(graph.len(), 4);
    let path = cache.entity_path(&server.url(), &concept(), &e);
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);
    assert_eq!(lines[0], "<http://ex.org/e0> <http://example.org/mock/p> \"v0\" .");
    assert!(path.with_extension("json").is_file());

    // a cache hit issues no request
    let before = server.requests();
    let again = fetch_entity(&client, &cache, &concept(), &e, CacheMode::Prefer).unwrap();
    assert_eq!(again, graph);
    assert_eq!(server.requests(), before);
}

#[test]
fn entity_without_triples_still_counts() {
    let mut data = MockData::uniform("http://ex.org/e", 3, 2);
    data.members[1].1 = Graph::new();
    let server = MockServer::start(data).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let client = SparqlClient::new(fast_config(server.url())).unwrap();
    let outcome = run_acquisition(&client, &cache, &concept(), 7, CacheMode::Prefer).unwrap();
    let empty = Iri::new("http://ex.org/e1").unwrap();
    assert_eq!(fs::read(cache.entity_path(&server.url(), &concept(), &empty)).unwrap(), b"");
    let profile = build_profile(&outcome.graph, &concept());
    assert_eq!(profile.total(), 3);
}

#[test]
fn warm_cache_rerun_is_request_free_and_identical() {
    let server = MockServer::start(MockData::uniform("http://ex.org/e", 30, 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let config = EndpointConfig {
        page_size: 8,
        max_entities: 12,
        parallelism: 3,
        ..fast_config(server.url())
    };
    let client = SparqlClient::new(config.clone()).unwrap();
    let first = run_acquisition(&client, &cache, &concept(), 42, CacheMode::Prefer).unwrap();
    assert!(first.requests > 0);
    assert_eq!(first.manifest.entities.len(), 12);
    assert!(first.manifest.failures.is_empty());
    let manifest_bytes = fs::read(cache.manifest_path(&server.url(), &concept())).unwrap();

    let cold_requests = server.requests();
    let client = SparqlClient::new(config).unwrap();
    let second = run_acquisition(&client, &cache, &concept(), 42, CacheMode::Prefer).unwrap();
    assert_eq!(second.requests, 0);
    assert_eq!(server.requests(), cold_requests);
    assert_eq!(
        semrich::rdf::serialize_ntriples(&first.graph),
        semrich::rdf::serialize_ntriples(&second.graph)
    );
    assert_eq!(fs::read(cache.manifest_path(&server.url(), &concept())).unwrap(), manifest_bytes);

    // offline mode works from the same cache
    let offline = run_acquisition(&client, &cache, &concept(), 42, CacheMode::Offline).unwrap();
    assert_eq!(offline.graph, first.graph);
}

#[test]
fn assembled_graph_matches_incremental_profile() {
    let server = MockServer::start(MockData::uniform("http://ex.org/e", 10, 2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let client = SparqlClient::new(fast_config(server.url())).unwrap();
    let outcome = run_acquisition(&client, &cache, &concept(), 1, CacheMode::Prefer).unwrap();
    let whole = build_profile(&outcome.graph, &concept());

    let mut incremental = semrich::ConceptProfile::empty(concept());
    for e in &outcome.manifest.entities {
        let g = cache.read_entity(&server.url(), &concept(), e).unwrap();
        let term = Term::Iri(e.clone());
        let features = semrich::entity_features(&g, &term, &concept());
        incremental.insert_entity(term, features).unwrap();
    }
    assert_eq!(incremental.pattern_counts(), whole.pattern_counts());
    assert_eq!(incremental.total(), whole.total());

    let from_dir = load_concept_dir(&cache.concept_dir(&server.url(), &concept())).unwrap();
    assert_eq!(from_dir, outcome.graph);
    assert_eq!(assemble(&cache, &outcome.manifest).unwrap(), outcome.graph);
}

#[test]
fn broken_entities_are_recorded_not_fatal() {
    let broken = Iri::new("http://ex.org/e2").unwrap();
    let server = MockServer::start(MockData {
        broken: vec![broken.clone()],
        ..MockData::uniform("http://ex.org/e", 5, 1)
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let client = SparqlClient::new(EndpointConfig {
        max_retries: 1,
        ..fast_config(server.url())
    })
    .unwrap();
    let outcome = run_acquisition(&client, &cache, &concept(), 3, CacheMode::Prefer).unwrap();
    assert_eq!(outcome.manifest.failures.len(), 1);
    assert_eq!(outcome.manifest.failures[0].entity, broken);
    let profile = build_profile(&outcome.graph, &concept());
    assert_eq!(profile.total(), 4);
}

#[test]
fn sampling_5000_with_two_seeds() {
    let candidates: Vec<Term> = (0..5000).map(|k| Term::iri(format!("http://ex.org/m{k}")).unwrap()).collect();
    let a = sample_entities(&candidates, 1000, 1);
    let b = sample_entities(&candidates, 1000, 2);
    assert_eq!(a.len(), 1000);
    assert_eq!(b.len(), 1000);
    assert_ne!(a, b);
    assert_eq!(a, sample_entities(&candidates, 1000, 1));
    assert_eq!(a.iter().collect::<BTreeSet<_>>().len(), 1000);
}

#[test]
fn fetch_config_reports_per_endpoint_and_total_failure() {
    let server = MockServer::start(MockData::uniform("http://ex.org/e", 6, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let dead = dead_endpoint_url();
    let config = FetchConfig {
        cache_dir: dir.path().to_path_buf(),
        concept: concept(),
        seed: 9,
        cache_mode: CacheMode::Prefer,
        endpoints: vec![
            fast_config(server.url()),
            EndpointConfig {
                max_retries: 0,
                ..fast_config(dead.clone())
            },
        ],
    };
    let report = run_fetch(&config).unwrap();
    assert!(!report.all_failed());
    assert_eq!(report.endpoints[0].entities, 6);
    assert_eq!(report.endpoints[0].failures, 0);
    assert!(report.endpoints[1].error.is_some());

    // the good endpoint's manifest survives a later run where everything is down
    let cache = Cache::new(dir.path());
    let manifest_path = cache.manifest_path(&server.url(), &concept());
    let before = fs::read(&manifest_path).unwrap();
    let url = server.url();
    drop(server);
    let down = FetchConfig {
        cache_mode: CacheMode::Refresh,
        endpoints: vec![EndpointConfig {
            max_retries: 0,
            ..fast_config(url)
        }],
        ..config
    };
    let report = run_fetch(&down).unwrap();
    assert!(report.all_failed());
    assert_eq!(fs::read(&manifest_path).unwrap(), before);
}

#[test]
fn manifest_lists_seed_and_entities() {
    let server = MockServer::start(MockData::uniform("http://ex.org/e", 4, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let client = SparqlClient::new(fast_config(server.url())).unwrap();
    run_acquisition(&client, &cache, &concept(), 11, CacheMode::Prefer).unwrap();
    let manifest = cache.read_manifest(&server.url(), &concept()).unwrap().unwrap();
    assert_eq!(manifest.seed, 11);
    assert_eq!(manifest.entities.len(), 4);
    assert!(manifest.failures.is_empty());
}
