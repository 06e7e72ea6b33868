//! Per-concept pattern profiles.
//!
//! A pattern is a `⟨predicate, object⟩` pair matched by an entity when the
//! triple `⟨entity, predicate, object⟩` is asserted. A profile records, for
//! one concept, every member entity with its feature set and how many
//! members match each observed pattern.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::rational::Probability;
use crate::rdf::{vocab, Graph, Iri, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("concept {0} has no entities; probabilities are undefined")]
    EmptyProfile(Iri),
    #[error("cannot merge profiles of different concepts: {left} and {right}")]
    ConceptMismatch { left: Iri, right: Iri },
    #[error("{count} entities occur in both profiles (first: {})", .sample.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", "))]
    Overlap { count: usize, sample: Vec<Term> },
    #[error("entity {0} is already a member of the profile")]
    DuplicateEntity(Term),
    #[error("pattern objects cannot be blank nodes")]
    BlankObject,
    #[error("invalid profile document: {0}")]
    InvalidDocument(String),
}

/// A `⟨predicate, object⟩` pair. The object is never a blank node.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    predicate: Iri,
    object: Term,
}

impl Pattern {
    pub fn new(predicate: Iri, object: Term) -> Result<Self, ProfileError> {
        if object.is_blank() {
            return Err(ProfileError::BlankObject);
        }
        Ok(Pattern { predicate, object })
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    fn export_key(&self) -> (&str, &str, String) {
        (
            self.predicate.as_str(),
            self.object.lexical_key(),
            self.object.to_string(),
        )
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}⟩", self.predicate, self.object)
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub type FeatureSet = BTreeSet<Pattern>;

/// Patterns matched by `entity`: its outgoing `⟨p, o⟩` pairs, minus the
/// membership triple `rdf:type concept` and minus blank-node objects.
pub fn entity_features(graph: &Graph, entity: &Term, concept: &Iri) -> FeatureSet {
    graph
        .outgoing(entity)
        .iter()
        .filter(|t| !t.object().is_blank())
        .filter(|t| !is_membership(t.predicate(), t.object(), concept))
        .map(|t| Pattern {
            predicate: t.predicate().clone(),
            object: t.object().clone(),
        })
        .collect()
}

/// Applies the same exclusions as [`entity_features`] to a caller-supplied
/// feature set.
pub fn normalize_features<'a>(features: impl IntoIterator<Item = &'a Pattern>, concept: &Iri) -> FeatureSet {
    features
        .into_iter()
        .filter(|p| !is_membership(&p.predicate, &p.object, concept))
        .cloned()
        .collect()
}

fn is_membership(predicate: &Iri, object: &Term, concept: &Iri) -> bool {
    predicate.as_str() == vocab::RDF_TYPE && object.as_iri() == Some(concept)
}

/// What to do when merging profiles whose entity sets intersect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapPolicy {
    /// Overlap is an error; the decay inequality only holds for disjoint sources.
    #[default]
    Reject,
    /// Shared entities keep the union of their feature sets. The decay
    /// inequality is no longer guaranteed.
    UnionFeatures,
}

/// Entity set and pattern counts of one concept in one dataset.
#[derive(Clone, PartialEq, Eq)]
pub struct ConceptProfile {
    concept: Iri,
    members: BTreeMap<Term, FeatureSet>,
    counts: BTreeMap<Pattern, u64>,
}

impl fmt::Debug for ConceptProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConceptProfile")
            .field("concept", &self.concept)
            .field("total", &self.total())
            .field("counts", &self.counts)
            .finish()
    }
}

impl ConceptProfile {
    pub fn empty(concept: Iri) -> Self {
        ConceptProfile {
            concept,
            members: BTreeMap::new(),
            counts: BTreeMap::new(),
        }
    }

    /// Builds a profile from explicit members. Features are normalized the
    /// same way [`entity_features`] does.
    pub fn from_members(
        concept: Iri,
        members: impl IntoIterator<Item = (Term, FeatureSet)>,
    ) -> Result<Self, ProfileError> {
        let mut profile = ConceptProfile::empty(concept);
        for (entity, features) in members {
            profile.insert_entity(entity, features)?;
        }
        Ok(profile)
    }

    pub fn concept(&self) -> &Iri {
        &self.concept
    }

    /// `|S^α|`.
    pub fn total(&self) -> u64 {
        self.members.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = &Term> {
        self.members.keys()
    }

    pub fn members(&self) -> &BTreeMap<Term, FeatureSet> {
        &self.members
    }

    pub fn contains_entity(&self, entity: &Term) -> bool {
        self.members.contains_key(entity)
    }

    pub fn features_of(&self, entity: &Term) -> Option<&FeatureSet> {
        self.members.get(entity)
    }

    /// Observed patterns (the universe `I`) with their match counts.
    /// Every count is in `1..=total`.
    pub fn pattern_counts(&self) -> &BTreeMap<Pattern, u64> {
        &self.counts
    }

    pub fn count(&self, pattern: &Pattern) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    /// Adds one entity, updating counts in place.
    pub fn insert_entity(&mut self, entity: Term, features: FeatureSet) -> Result<(), ProfileError> {
        if self.members.contains_key(&entity) {
            return Err(ProfileError::DuplicateEntity(entity));
        }
        let features = normalize_features(&features, &self.concept);
        for pattern in &features {
            *self.counts.entry(pattern.clone()).or_insert(0) += 1;
        }
        self.members.insert(entity, features);
        Ok(())
    }

    /// Exact `p(i, α, S)`; zero for patterns outside the universe.
    pub fn probability(&self, pattern: &Pattern) -> Result<Probability, ProfileError> {
        pattern_probability(self, pattern)
    }

    pub(crate) fn require_nonempty(&self) -> Result<(), ProfileError> {
        if self.is_empty() {
            Err(ProfileError::EmptyProfile(self.concept.clone()))
        } else {
            Ok(())
        }
    }
}

pub fn build_profile(graph: &Graph, concept: &Iri) -> ConceptProfile {
    build_profile_with(graph, concept, Execution::default())
}

/// Feature extraction runs per entity under `exec`; counts are combined by
/// addition so the result does not depend on the mode.
pub fn build_profile_with(graph: &Graph, concept: &Iri, exec: Execution) -> ConceptProfile {
    let entities: Vec<&Term> = graph.entities_of_type(concept).iter().collect();
    build_from_entities(graph, concept, &entities, exec)
}

/// Profile over a chosen subset of entities (e.g. a sample). Entities are
/// taken as members whether or not the graph types them.
pub fn build_profile_for(graph: &Graph, concept: &Iri, entities: &[Term]) -> ConceptProfile {
    let refs: Vec<&Term> = entities.iter().collect();
    build_from_entities(graph, concept, &refs, Execution::default())
}

fn build_from_entities(graph: &Graph, concept: &Iri, entities: &[&Term], exec: Execution) -> ConceptProfile {
    let features = exec.map(entities, |e| entity_features(graph, e, concept));
    let mut counts: BTreeMap<Pattern, u64> = BTreeMap::new();
    let mut members = BTreeMap::new();
    for (entity, features) in entities.iter().zip(features) {
        if members.contains_key(*entity) {
            continue;
        }
        for pattern in &features {
            *counts.entry(pattern.clone()).or_insert(0) += 1;
        }
        members.insert((*entity).clone(), features);
    }
    ConceptProfile {
        concept: concept.clone(),
        members,
        counts,
    }
}

pub fn pattern_probability(profile: &ConceptProfile, pattern: &Pattern) -> Result<Probability, ProfileError> {
    profile.require_nonempty()?;
    Ok(Probability::new(profile.count(pattern), profile.total()))
}

/// Counts add per pattern and totals add, so every merged probability is
/// the entity-weighted mean of the sources' probabilities.
pub fn merge_profiles(
    a: &ConceptProfile,
    b: &ConceptProfile,
    policy: OverlapPolicy,
) -> Result<ConceptProfile, ProfileError> {
    if a.concept != b.concept {
        return Err(ProfileError::ConceptMismatch {
            left: a.concept.clone(),
            right: b.concept.clone(),
        });
    }
    if policy == OverlapPolicy::Reject {
        check_disjoint(a, b)?;
    }
    let (mut merged, other) = if a.members.len() >= b.members.len() {
        (a.clone(), b)
    } else {
        (b.clone(), a)
    };
    for (entity, features) in &other.members {
        match merged.members.get_mut(entity) {
            None => {
                for pattern in features {
                    *merged.counts.entry(pattern.clone()).or_insert(0) += 1;
                }
                merged.members.insert(entity.clone(), features.clone());
            }
            Some(existing) => {
                for pattern in features {
                    if existing.insert(pattern.clone()) {
                        *merged.counts.entry(pattern.clone()).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    Ok(merged)
}

pub(crate) fn check_disjoint(a: &ConceptProfile, b: &ConceptProfile) -> Result<(), ProfileError> {
    let (small, large) = if a.members.len() <= b.members.len() { (a, b) } else { (b, a) };
    let shared: Vec<&Term> = small
        .members
        .keys()
        .filter(|e| large.members.contains_key(*e))
        .collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(ProfileError::Overlap {
            count: shared.len(),
            sample: shared.into_iter().take(5).cloned().collect(),
        })
    }
}

/// JSON form of a profile. Patterns are ordered by predicate, then object
/// lexical form; entities reference patterns by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub concept: Iri,
    pub total: u64,
    pub patterns: Vec<PatternCount>,
    pub entities: Vec<EntityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCount {
    pub predicate: Iri,
    pub object: Term,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityEntry {
    pub id: Term,
    pub patterns: Vec<usize>,
}

impl ConceptProfile {
    pub fn to_document(&self) -> ProfileDocument {
        let mut ordered: Vec<(&Pattern, u64)> = self.counts.iter().map(|(p, c)| (p, *c)).collect();
        ordered.sort_by(|x, y| x.0.export_key().cmp(&y.0.export_key()));
        let index: BTreeMap<&Pattern, usize> = ordered.iter().enumerate().map(|(i, (p, _))| (*p, i)).collect();
        ProfileDocument {
            concept: self.concept.clone(),
            total: self.total(),
            patterns: ordered
                .iter()
                .map(|(p, c)| PatternCount {
                    predicate: p.predicate.clone(),
                    object: p.object.clone(),
                    count: *c,
                })
                .collect(),
            entities: self
                .members
                .iter()
                .map(|(id, features)| {
                    let mut patterns: Vec<usize> = features.iter().map(|p| index[p]).collect();
                    patterns.sort_unstable();
                    EntityEntry {
                        id: id.clone(),
                        patterns,
                    }
                })
                .collect(),
        }
    }

    /// Rebuilds a profile and checks the document's counts and total
    /// against the entity entries.
    pub fn from_document(doc: &ProfileDocument) -> Result<Self, ProfileError> {
        let invalid = |msg: String| ProfileError::InvalidDocument(msg);
        let patterns: Vec<Pattern> = doc
            .patterns
            .iter()
            .map(|pc| Pattern::new(pc.predicate.clone(), pc.object.clone()))
            .collect::<Result<_, _>>()?;
        let mut profile = ConceptProfile::empty(doc.concept.clone());
        for entry in &doc.entities {
            let features = entry
                .patterns
                .iter()
                .map(|&i| patterns.get(i).cloned().ok_or_else(|| invalid(format!("pattern index {i} out of range"))))
                .collect::<Result<FeatureSet, _>>()?;
            profile.insert_entity(entry.id.clone(), features)?;
        }
        if profile.total() != doc.total {
            return Err(invalid(format!("total {} but {} entities", doc.total, profile.total())));
        }
        for (pattern, pc) in patterns.iter().zip(&doc.patterns) {
            if profile.count(pattern) != pc.count {
                return Err(invalid(format!("count mismatch for {pattern}")));
            }
        }
        if profile.counts.len() != patterns.len() {
            return Err(invalid("pattern list does not match entity features".into()));
        }
        Ok(profile)
    }
}
