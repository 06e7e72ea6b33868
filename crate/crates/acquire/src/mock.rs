//! A minimal in-process SPARQL endpoint for tests and offline demos.
//!
//! It understands exactly the two query shapes the client sends: a paged
//! member `SELECT` and an outgoing-triples `CONSTRUCT`.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};
use std::thread::{self, JoinHandle};

use regex::Regex;

use semrich::rdf::serialize_ntriples;
use semrich::{Graph, Iri, Term, Triple};

#[derive(Debug, Clone, Default)]
pub struct MockData {
    /// Members in the order the endpoint lists them, with their outgoing triples.
    pub members: Vec<(Iri, Graph)>,
    /// Extra literal bindings appended to the member listing.
    pub non_iri_members: usize,
    /// The first `fail_first` requests get HTTP 503.
    pub fail_first: u64,
    /// Entities whose CONSTRUCT always fails with HTTP 500.
    pub broken: Vec<Iri>,
}

impl MockData {
    /// `n` members `{prefix}{k}`, each with `triples_per_entity` literal triples.
    pub fn uniform(prefix: &str, n: usize, triples_per_entity: usize) -> Self {
        let p = Iri::new("http://example.org/mock/p").expect("valid IRI");
        let members = (0..n)
            .map(|k| {
                let e = Iri::new(format!("{prefix}{k}")).expect("valid IRI");
                let g = Graph::from_triples((0..triples_per_entity).map(|j| {
                    Triple::new(Term::Iri(e.clone()), p.clone(), Term::literal(format!("v{j}"))).expect("IRI subject")
                }));
                (e, g)
            })
            .collect();
        MockData {
            members,
            ..MockData::default()
        }
    }
}

struct State {
    data: MockData,
    by_entity: BTreeMap<Iri, usize>,
    requests: AtomicU64,
    shutdown: AtomicBool,
}

pub struct MockServer {
    addr: SocketAddr,
    state: Arc<State>,
    accept: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(data: MockData) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let by_entity = data.members.iter().enumerate().map(|(i, (e, _))| (e.clone(), i)).collect();
        let state = Arc::new(State {
            data,
            by_entity,
            requests: AtomicU64::new(0),
            shutdown: AtomicBool::new(false),
        });
        let accept_state = Arc::clone(&state);
        let accept = thread::spawn(move || {
            for stream in listener.incoming() {
                if accept_state.shutdown.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let st = Arc::clone(&accept_state);
                thread::spawn(move || {
                    let _ = handle(&st, stream);
                });
            }
        });
        Ok(MockServer {
            addr,
            state,
            accept: Some(accept),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}/sparql", self.addr)
    }

    /// Requests received so far, failed ones included.
    pub fn requests(&self) -> u64 {
        self.state.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.state.shutdown.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.accept.take() {
            let _ = handle.join();
        }
    }
}

/// A URL on which nothing listens.
pub fn dead_endpoint_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().expect("addr");
    drop(listener);
    format!("http://{addr}/sparql")
}

fn handle(state: &State, stream: TcpStream) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 || header == "\r\n" || header == "\n" {
            break;
        }
    }
    if state.shutdown.load(Ordering::SeqCst) {
        return Ok(());
    }
    let n = state.requests.fetch_add(1, Ordering::SeqCst);
    let target = request_line.split_whitespace().nth(1).unwrap_or("/");
    let query = url::Url::parse(&format!("http://mock{target}"))
        .ok()
        .and_then(|u| u.query_pairs().find(|(k, _)| k == "query").map(|(_, v)| v.into_owned()))
        .unwrap_or_default();

    let (status, content_type, body) = if n < state.data.fail_first {
        (503, "text/plain", "unavailable".to_owned())
    } else {
        answer(state, &query)
    };
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}

fn answer(state: &State, query: &str) -> (u16, &'static str, String) {
    static PAGE: OnceLock<Regex> = OnceLock::new();
    static SUBJECT: OnceLock<Regex> = OnceLock::new();
    let page = PAGE.get_or_init(|| Regex::new(r"LIMIT (\d+) OFFSET (\d+)").expect("regex"));
    let subject = SUBJECT.get_or_init(|| Regex::new(r"^CONSTRUCT \{ <([^>]*)>").expect("regex"));

    if query.starts_with("SELECT") {
        let Some(caps) = page.captures(query) else {
            return (400, "text/plain", "missing LIMIT/OFFSET".to_owned());
        };
        let limit: usize = caps[1].parse().unwrap_or(0);
        let offset: usize = caps[2].parse().unwrap_or(0);
        let mut rows: Vec<Term> = state.data.members.iter().map(|(e, _)| Term::Iri(e.clone())).collect();
        rows.extend((0..state.data.non_iri_members).map(|k| Term::literal(format!("not-an-entity-{k}"))));
        let bindings: Vec<serde_json::Value> = rows
            .into_iter()
            .skip(offset)
            .take(limit)
            .map(|t| serde_json::json!({ "e": t }))
            .collect();
        let body = serde_json::json!({ "head": { "vars": ["e"] }, "results": { "bindings": bindings } });
        return (200, "application/sparql-results+json", body.to_string());
    }
    if let Some(caps) = subject.captures(query) {
        let Ok(entity) = Iri::new(&caps[1]) else {
            return (400, "text/plain", "bad subject".to_owned());
        };
        if state.data.broken.contains(&entity) {
            return (500, "text/plain", "broken".to_owned());
        }
        let body = match state.by_entity.get(&entity) {
            Some(&i) => serialize_ntriples(&state.data.members[i].1),
            None => Vec::new(),
        };
        return (200, "application/n-triples", String::from_utf8(body).expect("N-Triples is UTF-8"));
    }
    (400, "text/plain", "unsupported query".to_owned())
}
