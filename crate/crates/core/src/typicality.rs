//! Entity typicality against a concept's characteristic set.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::exec::Execution;
use crate::profile::{build_profile, normalize_features, ConceptProfile, FeatureSet, Pattern, ProfileError};
use crate::rational::{exact_serde, ratio, Rational};
use crate::richness::{characteristic_set, richness_from_counts, richness_value, RichnessError};
use crate::rdf::{vocab, Graph, Iri, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypicalityError {
    #[error("concept {0} has an empty characteristic set; typicality is undefined")]
    EmptyCharacteristicSet(Iri),
    #[error("entity {0} is already a member of the profile")]
    AlreadyMember(Term),
    #[error("{0} is already used as a class in the graph")]
    ConceptInUse(Iri),
    #[error("sub-concept richness {sub} is below the parent's {parent}")]
    SubconceptPoorer { parent: String, sub: String },
    #[error(transparent)]
    Richness(#[from] RichnessError),
}

impl From<ProfileError> for TypicalityError {
    fn from(e: ProfileError) -> Self {
        TypicalityError::Richness(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Typical,
    Atypical,
}

impl Classification {
    /// Typical iff `δ ≥ 1/2`.
    pub fn of(delta: &Rational) -> Self {
        if *delta >= ratio(1, 2) {
            Classification::Typical
        } else {
            Classification::Atypical
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Typical => "typical",
            Classification::Atypical => "atypical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityScore {
    pub entity: Term,
    #[serde(skip)]
    pub features: FeatureSet,
    /// `|E ∩ Y| / |Y|`.
    #[serde(with = "exact_serde")]
    pub delta: Rational,
    pub classification: Classification,
}

/// Scores `entity` (with feature set `features`) against the profile's
/// characteristic set.
pub fn typicality(profile: &ConceptProfile, entity: Term, features: &FeatureSet) -> Result<TypicalityScore, TypicalityError> {
    let y = nonempty_characteristic_set(profile)?;
    Ok(score_against(&y, entity, normalize_features(features, profile.concept())))
}

fn nonempty_characteristic_set(profile: &ConceptProfile) -> Result<BTreeSet<Pattern>, TypicalityError> {
    let y = characteristic_set(profile)?;
    if y.is_empty() {
        return Err(TypicalityError::EmptyCharacteristicSet(profile.concept().clone()));
    }
    Ok(y)
}

fn delta_of(y: &BTreeSet<Pattern>, features: &FeatureSet) -> Rational {
    let shared = y.iter().filter(|p| features.contains(*p)).count();
    ratio(shared as i128, y.len() as i128)
}

fn score_against(y: &BTreeSet<Pattern>, entity: Term, features: FeatureSet) -> TypicalityScore {
    let delta = delta_of(y, &features);
    TypicalityScore {
        entity,
        features,
        classification: Classification::of(&delta),
        delta,
    }
}

/// Orders by `δ`; `Greater` means `a` is more typical than `b`.
pub fn more_typical(a: &TypicalityScore, b: &TypicalityScore) -> Ordering {
    a.delta.cmp(&b.delta)
}

/// `G(profile + entity) − G(profile)`, from counts extended by the
/// candidate's features.
pub fn richness_delta_on_add(profile: &ConceptProfile, entity: &Term, features: &FeatureSet) -> Result<Rational, TypicalityError> {
    let before = richness_value(profile)?;
    if profile.contains_entity(entity) {
        return Err(TypicalityError::AlreadyMember(entity.clone()));
    }
    let features = normalize_features(features, profile.concept());
    Ok(richness_after_add(profile, &features) - before)
}

fn richness_after_add(profile: &ConceptProfile, features: &FeatureSet) -> Rational {
    let counts = profile.pattern_counts();
    let extended: Vec<u64> = counts
        .iter()
        .map(|(p, &c)| c + u64::from(features.contains(p)))
        .chain(features.iter().filter(|p| !counts.contains_key(*p)).map(|_| 1))
        .collect();
    richness_from_counts(&extended, profile.total() + 1)
}

/// A prospective member.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub entity: Term,
    pub features: FeatureSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateReport {
    #[serde(flatten)]
    pub score: TypicalityScore,
    /// `None` when the candidate is already a member.
    #[serde(with = "option_exact")]
    pub richness_delta: Option<Rational>,
}

impl CandidateReport {
    /// Typical by `δ` yet lowering `G` when added.
    pub fn contradicts_typical_claim(&self) -> bool {
        self.score.classification == Classification::Typical
            && self.richness_delta.is_some_and(|d| d < Rational::from_integer(0))
    }
}

/// Scores every candidate against one profile. `Y` and `G` are computed
/// once; candidates are processed under `exec`.
pub fn score_candidates(
    profile: &ConceptProfile,
    candidates: &[Candidate],
    exec: Execution,
) -> Result<Vec<CandidateReport>, TypicalityError> {
    let y = nonempty_characteristic_set(profile)?;
    let before = richness_value(profile)?;
    Ok(exec.map(candidates, |c| {
        let features = normalize_features(&c.features, profile.concept());
        let richness_delta = (!profile.contains_entity(&c.entity)).then(|| richness_after_add(profile, &features) - before);
        CandidateReport {
            score: score_against(&y, c.entity.clone(), features),
            richness_delta,
        }
    }))
}

#[derive(Debug, Clone)]
pub struct Subconcept {
    pub graph: Graph,
    pub parent: Iri,
    pub concept: Iri,
    pub members: Vec<Term>,
    pub parent_g: Rational,
    /// `None` when no entity is typical.
    pub sub_g: Option<Rational>,
}

/// Adds `new_concept rdfs:subClassOf concept` and types every typical
/// member of `concept` as `new_concept`.
///
/// Fails if the sub-concept's richness, computed over the typical members'
/// features, falls below the parent's.
pub fn induce_subconcept(graph: &Graph, concept: &Iri, new_concept: &Iri) -> Result<Subconcept, TypicalityError> {
    if new_concept == concept || class_in_use(graph, new_concept) {
        return Err(TypicalityError::ConceptInUse(new_concept.clone()));
    }
    let profile = build_profile(graph, concept);
    let y = nonempty_characteristic_set(&profile)?;
    let parent_g = richness_value(&profile)?;

    let members: Vec<Term> = profile
        .members()
        .iter()
        .filter(|(_, features)| Classification::of(&delta_of(&y, features)) == Classification::Typical)
        .map(|(e, _)| e.clone())
        .collect();

    let sub_g = if members.is_empty() {
        None
    } else {
        let sub = ConceptProfile::from_members(
            concept.clone(),
            members.iter().map(|e| (e.clone(), profile.features_of(e).cloned().unwrap_or_default())),
        )?;
        let g = richness_value(&sub)?;
        if g < parent_g {
            return Err(TypicalityError::SubconceptPoorer {
                parent: crate::rational::to_fraction_string(&parent_g),
                sub: crate::rational::to_fraction_string(&g),
            });
        }
        Some(g)
    };

    let mut extra = vec![Triple::new(new_concept.clone().into(), vocab::rdfs_subclass_of(), concept.clone().into()).expect("IRI subject")];
    extra.extend(
        members
            .iter()
            .map(|e| Triple::new(e.clone(), vocab::rdf_type(), new_concept.clone().into()).expect("member subject")),
    );

    Ok(Subconcept {
        graph: graph.with_triples(extra),
        parent: concept.clone(),
        concept: new_concept.clone(),
        members,
        parent_g,
        sub_g,
    })
}

fn class_in_use(graph: &Graph, class: &Iri) -> bool {
    if !graph.entities_of_type(class).is_empty() {
        return true;
    }
    let term = Term::Iri(class.clone());
    graph.iter().any(|t| {
        t.predicate().as_str() == vocab::RDFS_SUBCLASS_OF && (t.subject() == &term || t.object() == &term)
    })
}

/// Tallies classifications.
pub fn classification_counts(reports: &[CandidateReport]) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for r in reports {
        *out.entry(r.score.classification.as_str()).or_insert(0) += 1;
    }
    out
}

mod option_exact {
    use super::*;
    use crate::rational::ExactJson;

    pub fn serialize<S: serde::Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(ExactJson::from).serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::merge_profiles;
    use crate::profile::OverlapPolicy;
    use crate::rdf::{parse_ntriples_str, ParseOptions};

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://ex.org/{s}")).unwrap()
    }

    fn pat(name: &str) -> Pattern {
        Pattern::new(iri(&format!("p{name}")), iri(&format!("o{name}")).into()).unwrap()
    }

    fn fs(names: &[&str]) -> FeatureSet {
        names.iter().map(|n| pat(n)).collect()
    }

    fn profile(prefix: &str, rows: &[&[&str]]) -> ConceptProfile {
        ConceptProfile::from_members(
            iri("C"),
            rows.iter()
                .enumerate()
                .map(|(k, row)| (Term::from(iri(&format!("{prefix}{k}"))), fs(row))),
        )
        .unwrap()
    }

    fn d1() -> ConceptProfile {
        profile("e", &[&["A", "B"], &["A", "B"], &["A"]])
    }

    #[test]
    fn boundary_is_typical() {
        let s = typicality(&d1(), iri("x").into(), &fs(&["A"])).unwrap();
        assert_eq!(s.delta, ratio(1, 2));
        assert_eq!(s.classification, Classification::Typical);
    }

    #[test]
    fn extremes() {
        let none = typicality(&d1(), iri("x").into(), &FeatureSet::new()).unwrap();
        assert_eq!(none.delta, ratio(0, 1));
        assert_eq!(none.classification, Classification::Atypical);
        let all = typicality(&d1(), iri("x").into(), &fs(&["A", "B", "Z"])).unwrap();
        assert_eq!(all.delta, ratio(1, 1));
    }

    #[test]
    fn empty_y_is_an_error() {
        let flat = profile("e", &[&["A"], &["B"]]);
        assert!(matches!(
            typicality(&flat, iri("x").into(), &fs(&["A"])),
            Err(TypicalityError::EmptyCharacteristicSet(_))
        ));
    }

    #[test]
    fn ordering() {
        let p = profile("e", &[&["A", "B", "C"], &["A", "B", "C"]]);
        let half = typicality(&p, iri("x").into(), &fs(&["A", "B"])).unwrap();
        let third = typicality(&p, iri("y").into(), &fs(&["A"])).unwrap();
        let one = typicality(&d1(), iri("x").into(), &fs(&["A", "B"])).unwrap();
        let zero = typicality(&d1(), iri("y").into(), &fs(&[])).unwrap();
        assert_eq!(more_typical(&half, &third), Ordering::Greater);
        assert_eq!(more_typical(&one, &zero), Ordering::Greater);
        assert_eq!(more_typical(&zero, &zero), Ordering::Equal);
    }

    #[test]
    fn featureless_add_to_d1() {
        let delta = richness_delta_on_add(&d1(), &iri("new").into(), &FeatureSet::new()).unwrap();
        assert_eq!(delta, ratio(-5, 6));
    }

    #[test]
    fn add_to_uniform_profile_is_neutral() {
        let uniform = profile("e", &[&["A", "B"], &["A", "B"]]);
        assert_eq!(
            richness_delta_on_add(&uniform, &iri("new").into(), &fs(&["A", "B"])).unwrap(),
            ratio(0, 1)
        );
    }

    #[test]
    fn add_existing_member_fails() {
        let p = d1();
        let e0 = p.entity_ids().next().unwrap().clone();
        assert_eq!(
            richness_delta_on_add(&p, &e0, &FeatureSet::new()),
            Err(TypicalityError::AlreadyMember(e0))
        );
    }

    #[test]
    fn batch_matches_single_calls() {
        let p = d1();
        let candidates: Vec<Candidate> = [&["A"][..], &[], &["A", "B"], &["B", "Q"]]
            .iter()
            .enumerate()
            .map(|(k, names)| Candidate {
                entity: iri(&format!("c{k}")).into(),
                features: fs(names),
            })
            .collect();
        let seq = score_candidates(&p, &candidates, Execution::Sequential).unwrap();
        let par = score_candidates(&p, &candidates, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        for (c, r) in candidates.iter().zip(&seq) {
            assert_eq!(r.richness_delta, Some(richness_delta_on_add(&p, &c.entity, &c.features).unwrap()));
            assert_eq!(r.score, typicality(&p, c.entity.clone(), &c.features).unwrap());
        }
    }

    const MERGED: &str = r#"
<http://ex.org/e1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/C> .
<http://ex.org/e1> <http://ex.org/pA> <http://ex.org/oA> .
<http://ex.org/e1> <http://ex.org/pB> <http://ex.org/oB> .
<http://ex.org/e2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/C> .
<http://ex.org/e2> <http://ex.org/pA> <http://ex.org/oA> .
<http://ex.org/e2> <http://ex.org/pB> <http://ex.org/oB> .
<http://ex.org/e3> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/C> .
<http://ex.org/e3> <http://ex.org/pA> <http://ex.org/oA> .
<http://ex.org/f1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/C> .
<http://ex.org/f1> <http://ex.org/pA> <http://ex.org/oA> .
<http://ex.org/f2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/C> .
<http://ex.org/f2> <http://ex.org/pC> <http://ex.org/oC> .
<http://ex.org/f3> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/C> .
<http://ex.org/f3> <http://ex.org/pC> <http://ex.org/oC> .
"#;

    #[test]
    fn induce_on_merged_fixture() {
        let g = parse_ntriples_str(MERGED, &ParseOptions::strict()).unwrap().graph;
        let sub = induce_subconcept(&g, &iri("C"), &iri("TypicalC")).unwrap();
        // merged Y = {A} (4/6); typical = members matching A
        let expected: Vec<Term> = ["e1", "e2", "e3", "f1"].iter().map(|e| iri(e).into()).collect();
        assert_eq!(sub.members, expected);
        assert_eq!(sub.parent_g, ratio(1, 3));
        assert_eq!(sub.sub_g, Some(ratio(1, 1)));
        assert_eq!(sub.graph.len(), g.len() + 1 + 4);
        let subclass: Vec<_> = sub.graph.subclass_edges();
        assert_eq!(subclass, vec![(iri("TypicalC"), iri("C"))]);
        assert!(g.iter().all(|t| sub.graph.contains(t)));

        assert!(matches!(
            induce_subconcept(&sub.graph, &iri("C"), &iri("TypicalC")),
            Err(TypicalityError::ConceptInUse(_))
        ));
    }

    #[test]
    fn all_typical_keeps_membership() {
        let a = d1();
        let b = profile("g", &[&["A", "B"]]);
        let m = merge_profiles(&a, &b, OverlapPolicy::Reject).unwrap();
        let reports = score_candidates(
            &m,
            &m.members()
                .iter()
                .map(|(e, f)| Candidate {
                    entity: e.clone(),
                    features: f.clone(),
                })
                .collect::<Vec<_>>(),
            Execution::Sequential,
        )
        .unwrap();
        assert!(reports.iter().all(|r| r.richness_delta.is_none()));
        assert_eq!(classification_counts(&reports)["typical"], 4);
    }
}
