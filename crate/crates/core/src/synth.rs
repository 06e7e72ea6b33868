//! Synthetic sources and ontologies with controlled pattern probabilities.
//!
//! In the default exact mode a pattern with target probability `q` over
//! `n` entities is matched by exactly `round(q·n)` of them; which entities
//! match is decided by a seeded shuffle. Profiling the output recovers
//! `round(q·n)/n` for every pattern.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::profile::Pattern;
use crate::rational::{parse_rational, to_fraction_string, Rational};
use crate::rdf::{vocab, Graph, Iri, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(String),
    #[error("n_entities must be positive")]
    NoEntities,
    #[error("pattern {0} is listed twice")]
    DuplicatePattern(String),
    #[error("pattern object cannot be a blank node")]
    BlankObject,
    #[error("invalid IRI built from the spec: {0}")]
    InvalidIri(String),
    #[error("ontology spec: {0}")]
    Ontology(String),
}

/// A probability written as `"2/3"`, `"0.75"` or a JSON number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetProbability(pub Rational);

impl Serialize for TargetProbability {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_fraction_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for TargetProbability {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(serde_json::Number),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(s) => s,
            Raw::Number(n) => n.to_string(),
        };
        parse_rational(&text)
            .map(TargetProbability)
            .ok_or_else(|| serde::de::Error::custom(format!("not a probability: {text:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realization {
    /// Exactly `round(q·n)` matches.
    #[default]
    Exact,
    /// Each entity matches independently with probability `q`.
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub predicate: Iri,
    pub object: Term,
    pub probability: TargetProbability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub concept: Iri,
    pub n_entities: u64,
    pub patterns: Vec<PatternSpec>,
    pub seed: u64,
    /// Entity `k` is `<prefix><k>`. Defaults to a seed-specific IRI under
    /// the concept, which keeps sources with different seeds disjoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_prefix: Option<String>,
    #[serde(default)]
    pub realization: Realization,
}

impl SourceSpec {
    pub fn entity_prefix(&self) -> String {
        self.entity_prefix
            .clone()
            .unwrap_or_else(|| format!("{}/synth-{}/e", self.concept.as_str().trim_end_matches('/'), self.seed))
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.n_entities == 0 {
            return Err(SynthError::NoEntities);
        }
        let mut seen = BTreeSet::new();
        for p in &self.patterns {
            check_probability(&p.probability.0)?;
            if p.object.is_blank() {
                return Err(SynthError::BlankObject);
            }
            if !seen.insert((p.predicate.clone(), p.object.clone())) {
                return Err(SynthError::DuplicatePattern(format!("{} {}", p.predicate, p.object)));
            }
        }
        Ok(())
    }
}

fn check_probability(q: &Rational) -> Result<(), SynthError> {
    if *q < Rational::zero() || *q > Rational::one() {
        return Err(SynthError::ProbabilityOutOfRange(to_fraction_string(q)));
    }
    Ok(())
}

/// `round(q·n)` with halves rounded up, computed exactly.
pub fn realized_count(q: &Rational, n: u64) -> u64 {
    let (a, b) = (*q.numer(), *q.denom());
    let twice = 2 * a * n as i128 + b;
    (twice.div_euclid(2 * b)) as u64
}

fn iri(s: String) -> Result<Iri, SynthError> {
    Iri::new(&s).map_err(|_| SynthError::InvalidIri(s))
}

fn choose_members(rng: &mut ChaCha8Rng, n: u64, q: &Rational, realization: Realization) -> Vec<bool> {
    let mut chosen = vec![false; n as usize];
    match realization {
        Realization::Exact => {
            let mut order: Vec<usize> = (0..n as usize).collect();
            order.shuffle(rng);
            for &i in order.iter().take(realized_count(q, n) as usize) {
                chosen[i] = true;
            }
        }
        Realization::Bernoulli => {
            let qf = crate::rational::to_f64(q);
            for slot in chosen.iter_mut() {
                *slot = rng.random::<f64>() < qf;
            }
        }
    }
    chosen
}

pub fn generate_source(spec: &SourceSpec) -> Result<Graph, SynthError> {
    spec.validate()?;
    let prefix = spec.entity_prefix();
    let entities: Vec<Term> = (0..spec.n_entities)
        .map(|k| iri(format!("{prefix}{k}")).map(Term::Iri))
        .collect::<Result<_, _>>()?;
    let mut triples: Vec<Triple> = entities
        .iter()
        .map(|e| Triple::new(e.clone(), vocab::rdf_type(), spec.concept.clone().into()).expect("IRI subject"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for p in &spec.patterns {
        let chosen = choose_members(&mut rng, spec.n_entities, &p.probability.0, spec.realization);
        for (entity, _) in entities.iter().zip(chosen).filter(|(_, c)| *c) {
            triples.push(Triple::new(entity.clone(), p.predicate.clone(), p.object.clone()).expect("IRI subject"));
        }
    }
    Ok(Graph::from_triples(triples))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    /// Node-specific patterns introduced at this depth.
    pub patterns: u32,
    pub probability: TargetProbability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologySpec {
    /// IRI prefix for concepts, predicates, values and entities.
    pub namespace: String,
    pub depth: u32,
    pub branching: u32,
    pub entities_per_leaf: u64,
    /// One entry per depth (root first); the last entry repeats.
    pub levels: Vec<LevelSpec>,
    /// Siblings are mutually exclusive: every entity belongs to exactly one leaf.
    #[serde(default = "default_true")]
    pub partition: bool,
    /// With `partition` off, this many entities of each leaf are also typed
    /// as its next sibling.
    #[serde(default)]
    pub overlap: u64,
    /// Node paths (e.g. `"0_2"`) whose entities receive none of the
    /// patterns of that node or its ancestors.
    #[serde(default)]
    pub feature_poor: Vec<String>,
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl OntologySpec {
    pub fn root(&self) -> Iri {
        self.concept_iri(&[]).expect("validated namespace")
    }

    /// `<ns>C` for the root, `<ns>C_0_2` for the third child of the first child.
    pub fn concept_iri(&self, path: &[u32]) -> Result<Iri, SynthError> {
        iri(format!("{}C{}", self.namespace, path_suffix(path)))
    }

    /// Every node path, root first, in breadth-first order.
    pub fn node_paths(&self) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..self.depth {
            let mut next = Vec::new();
            for path in &frontier {
                for b in 0..self.branching {
                    let mut child: Vec<u32> = path.clone();
                    child.push(b);
                    next.push(child);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    fn level(&self, depth: usize) -> &LevelSpec {
        &self.levels[depth.min(self.levels.len() - 1)]
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.levels.is_empty() {
            return Err(SynthError::Ontology("at least one level is required".into()));
        }
        if self.depth > 0 && self.branching == 0 {
            return Err(SynthError::Ontology("branching must be positive".into()));
        }
        if self.entities_per_leaf == 0 {
            return Err(SynthError::NoEntities);
        }
        for level in &self.levels {
            check_probability(&level.probability.0)?;
        }
        if self.partition && self.overlap > 0 {
            return Err(SynthError::Ontology("overlap requires partition = false".into()));
        }
        if self.overlap > self.entities_per_leaf {
            return Err(SynthError::Ontology("overlap exceeds entities_per_leaf".into()));
        }
        let paths: BTreeSet<String> = self.node_paths().iter().map(|p| path_key(p)).collect();
        if let Some(bad) = self.feature_poor.iter().find(|p| !paths.contains(*p)) {
            return Err(SynthError::Ontology(format!("unknown feature-poor node {bad:?}")));
        }
        iri(format!("{}C", self.namespace))?;
        Ok(())
    }

    /// Patterns introduced at a node.
    pub fn node_patterns(&self, path: &[u32]) -> Result<Vec<Pattern>, SynthError> {
        let key = if path.is_empty() { "root".to_owned() } else { path_key(path) };
        (0..self.level(path.len()).patterns)
            .map(|j| {
                let p = iri(format!("{}p_{key}_{j}", self.namespace))?;
                let o = iri(format!("{}v_{key}_{j}", self.namespace))?;
                Pattern::new(p, o.into()).map_err(|_| SynthError::BlankObject)
            })
            .collect()
    }
}

fn path_key(path: &[u32]) -> String {
    path.iter().map(u32::to_string).collect::<Vec<_>>().join("_")
}

fn path_suffix(path: &[u32]) -> String {
    path.iter().map(|b| format!("_{b}")).collect()
}

/// Subclass tree plus typed entities. Entities are asserted as members of
/// their leaf and of every ancestor.
pub fn generate_ontology(spec: &OntologySpec) -> Result<Graph, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut triples = Vec::new();
    let poor: BTreeSet<&str> = spec.feature_poor.iter().map(String::as_str).collect();

    let paths = spec.node_paths();
    for path in paths.iter().filter(|p| !p.is_empty()) {
        let child = spec.concept_iri(path)?;
        let parent = spec.concept_iri(&path[..path.len() - 1])?;
        triples.push(Triple::new(child.into(), vocab::rdfs_subclass_of(), parent.into()).expect("IRI subject"));
    }

    let leaves: Vec<&Vec<u32>> = paths.iter().filter(|p| p.len() == spec.depth as usize).collect();
    let n = spec.entities_per_leaf;
    for leaf in &leaves {
        let entities: Vec<Term> = (0..n)
            .map(|k| {
                let key = if leaf.is_empty() { "root".to_owned() } else { path_key(leaf) };
                iri(format!("{}e_{key}_{k}", spec.namespace)).map(Term::Iri)
            })
            .collect::<Result<_, _>>()?;

        for depth in 0..=leaf.len() {
            let node = spec.concept_iri(&leaf[..depth])?;
            for e in &entities {
                triples.push(Triple::new(e.clone(), vocab::rdf_type(), node.clone().into()).expect("IRI subject"));
            }
        }

        if !spec.partition && spec.overlap > 0 && spec.depth > 0 {
            let sibling_of = |path: &[u32]| {
                let mut s = path.to_vec();
                let last = s.len() - 1;
                s[last] = (s[last] + 1) % spec.branching;
                s
            };
            let sibling = spec.concept_iri(&sibling_of(leaf))?;
            for e in entities.iter().take(spec.overlap as usize) {
                triples.push(Triple::new(e.clone(), vocab::rdf_type(), sibling.clone().into()).expect("IRI subject"));
            }
        }

        // a poor node strips its own patterns and its ancestors' from every
        // entity below it
        let stripped_above = (0..=leaf.len())
            .rev()
            .find(|&d| poor.contains(path_key(&leaf[..d]).as_str()) && d > 0);
        for depth in 0..=leaf.len() {
            let node_path = &leaf[..depth];
            let level = spec.level(depth);
            for pattern in spec.node_patterns(node_path)? {
                let chosen = choose_members(&mut rng, n, &level.probability.0, Realization::Exact);
                if stripped_above.is_some_and(|d| depth <= d) {
                    continue;
                }
                for (e, _) in entities.iter().zip(chosen).filter(|(_, c)| *c) {
                    triples.push(
                        Triple::new(e.clone(), pattern.predicate().clone(), pattern.object().clone()).expect("IRI subject"),
                    );
                }
            }
        }
    }
    Ok(Graph::from_triples(triples))
}

/// Everything `synth` accepts in one JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SynthDocument {
    Source(SourceSpec),
    Sources { sources: Vec<SourceSpec> },
    Ontology(OntologySpec),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::build_profile;
    use crate::rational::ratio;
    use crate::rdf::serialize_ntriples;
    use crate::richness::{richness_value, weighted_mean};

    fn ex(s: &str) -> Iri {
        Iri::new(format!("http://ex.org/{s}")).unwrap()
    }

    fn d1_spec(seed: u64) -> SourceSpec {
        SourceSpec {
            concept: ex("C"),
            n_entities: 3,
            patterns: vec![
                PatternSpec {
                    predicate: ex("p1"),
                    object: ex("o1").into(),
                    probability: TargetProbability(ratio(1, 1)),
                },
                PatternSpec {
                    predicate: ex("p2"),
                    object: ex("o2").into(),
                    probability: TargetProbability(ratio(2, 3)),
                },
            ],
            seed,
            entity_prefix: None,
            realization: Realization::Exact,
        }
    }

    #[test]
    fn rounding() {
        assert_eq!(realized_count(&ratio(2, 3), 3), 2);
        assert_eq!(realized_count(&ratio(1, 2), 3), 2);
        assert_eq!(realized_count(&ratio(1, 3), 1), 0);
        assert_eq!(realized_count(&ratio(1, 2), 1), 1);
        assert_eq!(realized_count(&ratio(9, 10), 1000), 900);
        assert_eq!(realized_count(&ratio(0, 1), 10), 0);
    }

    #[test]
    fn d1_spec_realizes_d1() {
        let g = generate_source(&d1_spec(1)).unwrap();
        let p = build_profile(&g, &ex("C"));
        assert_eq!(p.total(), 3);
        let counts: Vec<u64> = p.pattern_counts().values().copied().collect();
        assert_eq!(counts, vec![3, 2]);
        assert_eq!(richness_value(&p).unwrap(), ratio(4, 3));
    }

    #[test]
    fn single_entity_rounds() {
        let mut spec = d1_spec(3);
        spec.n_entities = 1;
        spec.patterns[1].probability = TargetProbability(ratio(1, 3));
        let p = build_profile(&generate_source(&spec).unwrap(), &ex("C"));
        assert_eq!(p.pattern_counts().len(), 1);
        assert!(p.pattern_counts().values().all(|&c| c == 1));
    }

    #[test]
    fn deterministic_bytes() {
        let a = serialize_ntriples(&generate_source(&d1_spec(9)).unwrap());
        let b = serialize_ntriples(&generate_source(&d1_spec(9)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn spec_validation() {
        let mut spec = d1_spec(1);
        spec.patterns[0].probability = TargetProbability(ratio(3, 2));
        assert!(matches!(generate_source(&spec), Err(SynthError::ProbabilityOutOfRange(_))));
        let mut spec = d1_spec(1);
        spec.patterns.push(spec.patterns[0].clone());
        assert!(matches!(generate_source(&spec), Err(SynthError::DuplicatePattern(_))));
        let mut spec = d1_spec(1);
        spec.n_entities = 0;
        assert_eq!(generate_source(&spec), Err(SynthError::NoEntities));
    }

    #[test]
    fn spec_json_accepts_fraction_and_number() {
        let json = r#"{"kind":"source","concept":"http://ex.org/C","n_entities":4,"seed":1,
            "patterns":[{"predicate":"http://ex.org/p","object":{"type":"uri","value":"http://ex.org/o"},"probability":"3/4"},
                        {"predicate":"http://ex.org/q","object":{"type":"literal","value":"x"},"probability":0.5}]}"#;
        let doc: SynthDocument = serde_json::from_str(json).unwrap();
        let SynthDocument::Source(spec) = doc else { panic!() };
        assert_eq!(spec.patterns[0].probability.0, ratio(3, 4));
        assert_eq!(spec.patterns[1].probability.0, ratio(1, 2));
    }

    fn onto(depth: u32, branching: u32) -> OntologySpec {
        OntologySpec {
            namespace: "http://ex.org/o/".into(),
            depth,
            branching,
            entities_per_leaf: 20,
            levels: vec![LevelSpec {
                patterns: 2,
                probability: TargetProbability(ratio(9, 10)),
            }],
            partition: true,
            overlap: 0,
            feature_poor: vec![],
            seed: 5,
        }
    }

    #[test]
    fn depth_zero_is_a_single_concept() {
        let g = generate_ontology(&onto(0, 3)).unwrap();
        assert!(g.subclass_edges().is_empty());
        assert_eq!(g.entities_of_type(&onto(0, 3).root()).len(), 20);
    }

    #[test]
    fn depth_two_edge_count() {
        let spec = onto(2, 3);
        let g = generate_ontology(&spec).unwrap();
        assert_eq!(g.subclass_edges().len(), 3 + 9);
        assert_eq!(g.entities_of_type(&spec.root()).len(), 9 * 20);
    }

    #[test]
    fn partitioned_parent_is_at_most_children_mean() {
        let spec = onto(1, 2);
        let g = generate_ontology(&spec).unwrap();
        let parent = richness_value(&build_profile(&g, &spec.root())).unwrap();
        let children: Vec<(u64, Rational)> = (0..2)
            .map(|b| {
                let p = build_profile(&g, &spec.concept_iri(&[b]).unwrap());
                (p.total(), richness_value(&p).unwrap())
            })
            .collect();
        let mean = weighted_mean(children.iter().map(|(n, g)| (*n, g))).unwrap();
        assert!(parent <= mean);
        assert!(children.iter().all(|(_, g)| *g > parent));
    }

    #[test]
    fn feature_poor_child_is_poorer() {
        let mut spec = onto(1, 3);
        spec.levels = vec![
            LevelSpec {
                patterns: 4,
                probability: TargetProbability(Rational::one()),
            },
            LevelSpec {
                patterns: 2,
                probability: TargetProbability(ratio(9, 10)),
            },
        ];
        spec.feature_poor = vec!["1".into()];
        let g = generate_ontology(&spec).unwrap();
        let parent = richness_value(&build_profile(&g, &spec.root())).unwrap();
        let poor = richness_value(&build_profile(&g, &spec.concept_iri(&[1]).unwrap())).unwrap();
        // only the inherited ⟨rdf:type, root⟩ pattern survives
        assert_eq!(poor, Rational::one());
        // four root patterns now held by two thirds of the entities
        assert_eq!(parent, ratio(4, 3));
        assert!(poor < parent);
    }

    #[test]
    fn overlap_breaks_partition() {
        let mut spec = onto(1, 2);
        spec.partition = false;
        spec.overlap = 3;
        let g = generate_ontology(&spec).unwrap();
        assert_eq!(g.entities_of_type(&spec.concept_iri(&[0]).unwrap()).len(), 23);
        spec.partition = true;
        assert!(generate_ontology(&spec).is_err());
    }
}
