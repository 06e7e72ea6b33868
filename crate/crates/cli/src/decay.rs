//! Richness decay curves: start from one source and fold in the entities
//! of all other sources in a seeded order, recomputing `G` after each
//! chunk.

use std::collections::{BTreeMap, HashMap};

use semrich::rational::exact_serde;
use semrich::richness::{richness_from_counts, weighted_mean};
use semrich::{
    merge_profiles, richness_value, sample_entities, ConceptProfile, Execution, FeatureSet, Iri, OverlapPolicy,
    Pattern, ProfileError, Rational, RichnessError, Term,
};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayStep {
    /// Foreign entities added so far.
    pub added: u64,
    /// Entities in the working profile.
    pub entities: u64,
    #[serde(with = "exact_serde")]
    pub g: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    pub base: String,
    pub steps: Vec<DecayStep>,
}

impl DecayCurve {
    pub fn initial(&self) -> &Rational {
        &self.steps[0].g
    }

    pub fn last(&self) -> &Rational {
        &self.steps[self.steps.len() - 1].g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSummary {
    pub id: String,
    pub entities: u64,
    #[serde(with = "exact_serde")]
    pub g: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub concept: Iri,
    pub chunk: u64,
    pub seed: u64,
    pub sources: Vec<SourceSummary>,
    /// Entity-weighted mean of the sources' initial `G`.
    #[serde(with = "exact_serde")]
    pub weighted_average: Rational,
    /// `G` of the full merge.
    #[serde(with = "exact_serde")]
    pub merged: Rational,
    pub curves: Vec<DecayCurve>,
}

#[derive(Debug, thiserror::Error)]
pub enum DecayError {
    #[error("decay needs at least two sources, got {0}")]
    TooFewSources(usize),
    #[error("chunk size must be positive")]
    ZeroChunk,
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Richness(#[from] RichnessError),
}

/// Mutable copy of a profile's counts. Adding an entity touches only its
/// own patterns.
#[derive(Debug, Clone)]
pub struct WorkingProfile {
    members: HashMap<Term, FeatureSet>,
    counts: HashMap<Pattern, u64>,
    total: u64,
}

impl WorkingProfile {
    pub fn new(base: &ConceptProfile) -> Self {
        WorkingProfile {
            members: base.members().iter().map(|(e, f)| (e.clone(), f.clone())).collect(),
            counts: base.pattern_counts().iter().map(|(p, c)| (p.clone(), *c)).collect(),
            total: base.total(),
        }
    }

    /// Adds an entity; an entity already present gains only its missing
    /// patterns.
    pub fn add(&mut self, entity: &Term, features: &FeatureSet) {
        match self.members.get_mut(entity) {
            Some(existing) => {
                for p in features {
                    if existing.insert(p.clone()) {
                        *self.counts.entry(p.clone()).or_insert(0) += 1;
                    }
                }
            }
            None => {
                for p in features {
                    *self.counts.entry(p.clone()).or_insert(0) += 1;
                }
                self.members.insert(entity.clone(), features.clone());
                self.total += 1;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn richness(&self) -> Rational {
        richness_from_counts(self.counts.values(), self.total)
    }

    pub fn counts(&self) -> BTreeMap<Pattern, u64> {
        self.counts.iter().map(|(p, c)| (p.clone(), *c)).collect()
    }
}

/// Order in which `base`'s curve receives foreign entities: all other
/// sources' members, permuted by a seed derived from `seed` and `base`.
pub fn foreign_order(sources: &[(String, ConceptProfile)], base: usize, seed: u64) -> Vec<(Term, FeatureSet)> {
    let foreign: Vec<(Term, FeatureSet)> = sources
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != base)
        .flat_map(|(_, (_, p))| p.members().iter().map(|(e, f)| (e.clone(), f.clone())))
        .collect();
    let n = foreign.len();
    sample_entities(&foreign, n, seed.wrapping_add(base as u64))
}

pub fn decay_curve(
    sources: &[(String, ConceptProfile)],
    base: usize,
    chunk: u64,
    seed: u64,
) -> Result<DecayCurve, DecayError> {
    let (id, profile) = &sources[base];
    let mut working = WorkingProfile::new(profile);
    let mut steps = vec![DecayStep {
        added: 0,
        entities: working.total(),
        g: richness_value(profile)?,
    }];
    let order = foreign_order(sources, base, seed);
    let mut added = 0u64;
    for batch in order.chunks(chunk as usize) {
        for (entity, features) in batch {
            working.add(entity, features);
        }
        added += batch.len() as u64;
        steps.push(DecayStep {
            added,
            entities: working.total(),
            g: working.richness(),
        });
    }
    Ok(DecayCurve {
        base: id.clone(),
        steps,
    })
}

/// One curve per base source plus the reference values. Sources must be
/// disjoint unless `policy` unions overlapping entities.
pub fn decay_report(
    concept: &Iri,
    sources: &[(String, ConceptProfile)],
    chunk: u64,
    seed: u64,
    policy: OverlapPolicy,
    exec: Execution,
) -> Result<DecayReport, DecayError> {
    if sources.len() < 2 {
        return Err(DecayError::TooFewSources(sources.len()));
    }
    if chunk == 0 {
        return Err(DecayError::ZeroChunk);
    }
    let mut summaries = Vec::with_capacity(sources.len());
    for (id, p) in sources {
        summaries.push(SourceSummary {
            id: id.clone(),
            entities: p.total(),
            g: richness_value(p)?,
        });
    }
    let weighted_average = weighted_mean(summaries.iter().map(|s| (s.entities, &s.g))).expect("nonempty sources");

    let mut merged = sources[0].1.clone();
    for (_, p) in &sources[1..] {
        merged = merge_profiles(&merged, p, policy)?;
    }
    let merged_g = richness_value(&merged)?;

    let bases: Vec<usize> = (0..sources.len()).collect();
    let curves = exec
        .map(&bases, |&b| decay_curve(sources, b, chunk, seed))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DecayReport {
        concept: concept.clone(),
        chunk,
        seed,
        sources: summaries,
        weighted_average,
        merged: merged_g,
        curves,
    })
}
