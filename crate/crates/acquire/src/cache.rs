//! On-disk cache: `cache/<endpoint-digest>/<concept-digest>/<entity-digest>.nt`
//! with a `.json` sidecar per entity and a `run.json` manifest per
//! concept directory.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use semrich::rdf::{parse_ntriples_str, serialize_ntriples, vocab, ParseOptions};
use semrich::{Graph, Iri, Term, Triple};

use crate::AcquireError;

/// First 128 bits of SHA-256, hex encoded.
pub fn digest(value: &str) -> String {
    let hash = Sha256::digest(value.as_bytes());
    hex::encode(&hash[..16])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub endpoint: String,
    pub concept: Iri,
    pub entity: Iri,
    /// Seconds since the Unix epoch.
    pub fetched_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedEntity {
    pub entity: Iri,
    pub error: String,
}

/// `run.json`: everything needed to reassemble or resume a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub endpoint: String,
    pub concept: Iri,
    pub seed: u64,
    pub max_entities: u64,
    pub crawl_bound: u64,
    pub candidates: u64,
    pub skipped_non_iri: u64,
    /// Sampled entities in sample order.
    pub entities: Vec<Iri>,
    pub failures: Vec<FailedEntity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct CandidateListing {
    pub entities: Vec<Iri>,
    pub skipped_non_iri: u64,
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn concept_dir(&self, endpoint: &str, concept: &Iri) -> PathBuf {
        self.root.join(digest(endpoint)).join(digest(concept.as_str()))
    }

    pub fn entity_path(&self, endpoint: &str, concept: &Iri, entity: &Iri) -> PathBuf {
        self.concept_dir(endpoint, concept)
            .join(format!("{}.nt", digest(entity.as_str())))
    }

    pub fn manifest_path(&self, endpoint: &str, concept: &Iri) -> PathBuf {
        self.concept_dir(endpoint, concept).join("run.json")
    }

    pub(crate) fn listing_path(&self, endpoint: &str, concept: &Iri) -> PathBuf {
        self.concept_dir(endpoint, concept).join("candidates.json")
    }

    pub fn has_entity(&self, endpoint: &str, concept: &Iri, entity: &Iri) -> bool {
        self.entity_path(endpoint, concept, entity).is_file()
    }

    /// Stores the entity's triples canonically plus the sidecar; both
    /// writes are atomic renames.
    pub fn write_entity(&self, endpoint: &str, concept: &Iri, entity: &Iri, triples: &Graph) -> Result<CacheEntry, AcquireError> {
        let path = self.entity_path(endpoint, concept, entity);
        write_atomic(&path, &serialize_ntriples(triples))?;
        let entry = CacheEntry {
            endpoint: endpoint.to_owned(),
            concept: concept.clone(),
            entity: entity.clone(),
            fetched_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        let meta = serde_json::to_vec_pretty(&entry).expect("entry serializes");
        write_atomic(&path.with_extension("json"), &meta)?;
        Ok(entry)
    }

    pub fn read_entity(&self, endpoint: &str, concept: &Iri, entity: &Iri) -> Result<Graph, AcquireError> {
        read_entity_file(&self.entity_path(endpoint, concept, entity))
    }

    pub fn read_manifest(&self, endpoint: &str, concept: &Iri) -> Result<Option<RunManifest>, AcquireError> {
        read_json(&self.manifest_path(endpoint, concept))
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> Result<(), AcquireError> {
        let bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        write_atomic(&self.manifest_path(&manifest.endpoint, &manifest.concept), &bytes)
    }

    pub(crate) fn read_listing(&self, endpoint: &str, concept: &Iri) -> Result<Option<CandidateListing>, AcquireError> {
        read_json(&self.listing_path(endpoint, concept))
    }

    pub(crate) fn write_listing(&self, endpoint: &str, concept: &Iri, listing: &CandidateListing) -> Result<(), AcquireError> {
        let bytes = serde_json::to_vec_pretty(listing).expect("listing serializes");
        write_atomic(&self.listing_path(endpoint, concept), &bytes)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<T>, AcquireError> {
    match fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| AcquireError::Cache(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(AcquireError::Cache(format!("{}: {e}", path.display()))),
    }
}

fn read_entity_file(path: &Path) -> Result<Graph, AcquireError> {
    let text = fs::read_to_string(path).map_err(|e| AcquireError::Cache(format!("{}: {e}", path.display())))?;
    // blank nodes from different responses must not meet
    let scope = path.file_stem().and_then(|s| s.to_str()).unwrap_or("x");
    let scope = format!("c{}", &scope[..scope.len().min(12)]);
    parse_ntriples_str(&text, &ParseOptions::strict().scoped(scope))
        .map(|o| o.graph)
        .map_err(|e| AcquireError::Cache(format!("{}: {e}", path.display())))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), AcquireError> {
    let dir = path.parent().ok_or_else(|| AcquireError::Cache(format!("{} has no parent", path.display())))?;
    let io_err = |e: std::io::Error| AcquireError::Cache(format!("{}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Union of the cached entity graphs listed in the manifest, with a
/// membership triple for every entity that did not fail (so entities
/// without outgoing triples still count).
pub fn assemble(cache: &Cache, manifest: &RunManifest) -> Result<Graph, AcquireError> {
    assemble_with(manifest, |entity| cache.read_entity(&manifest.endpoint, &manifest.concept, entity))
}

fn assemble_with(
    manifest: &RunManifest,
    read: impl Fn(&Iri) -> Result<Graph, AcquireError>,
) -> Result<Graph, AcquireError> {
    let failed: BTreeSet<&Iri> = manifest.failures.iter().map(|f| &f.entity).collect();
    let mut triples: Vec<Triple> = Vec::new();
    for entity in manifest.entities.iter().filter(|e| !failed.contains(e)) {
        triples.extend(read(entity)?.iter().cloned());
        triples.push(
            Triple::new(Term::Iri(entity.clone()), vocab::rdf_type(), Term::Iri(manifest.concept.clone()))
                .expect("IRI subject"),
        );
    }
    Ok(Graph::from_triples(triples))
}

/// Loads a concept directory written by a run: its `run.json` if present,
/// otherwise every `*.nt` file in it.
pub fn load_concept_dir(dir: &Path) -> Result<Graph, AcquireError> {
    if let Some(manifest) = read_json::<RunManifest>(&dir.join("run.json"))? {
        // the directory may have been moved; resolve entities relative to it
        return assemble_with(&manifest, |entity| {
            read_entity_file(&dir.join(format!("{}.nt", digest(entity.as_str()))))
        });
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| AcquireError::Cache(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "nt"))
        .collect();
    files.sort();
    let mut triples = Vec::new();
    for f in files {
        triples.extend(read_entity_file(&f)?.iter().cloned());
    }
    Ok(Graph::from_triples(triples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_are_stable() {
        assert_eq!(digest("abc"), "ba7816bf8f01cfea414140de5dae2223");
        assert_eq!(digest("abc").len(), 32);
    }

    #[test]
    fn entity_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let c = Iri::new("http://ex.org/C").unwrap();
        let e = Iri::new("http://ex.org/e").unwrap();
        let g = Graph::from_triples(vec![Triple::new(
            e.clone().into(),
            Iri::new("http://ex.org/p").unwrap(),
            Term::literal("x"),
        )
        .unwrap()]);
        assert!(!cache.has_entity("http://ep", &c, &e));
        let entry = cache.write_entity("http://ep", &c, &e, &g).unwrap();
        assert_eq!(entry.entity, e);
        assert!(cache.has_entity("http://ep", &c, &e));
        assert_eq!(cache.read_entity("http://ep", &c, &e).unwrap(), g);
        // overwrite in place
        cache.write_entity("http://ep", &c, &e, &Graph::new()).unwrap();
        assert!(cache.read_entity("http://ep", &c, &e).unwrap().is_empty());
        assert_eq!(fs::read(cache.entity_path("http://ep", &c, &e)).unwrap(), b"");
    }
}
