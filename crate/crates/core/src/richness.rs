//! The richness measure and the merge-decay check.
//!
//! For a profile with `n` entities, a pattern matched by `c` of them has
//! probability `p = c/n`. Its contribution is `2p − 1` when `p > 1/2` and
//! zero otherwise; richness `G` is the sum of the contributions, and the
//! patterns that contribute form the characteristic set `Y`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;

use crate::profile::{check_disjoint, merge_profiles, ConceptProfile, OverlapPolicy, Pattern, ProfileError};
use crate::rational::{exact_serde, ratio, sum, Probability, Rational};
use crate::rdf::{Graph, Iri};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RichnessError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("concept {0} has no entities in the graph")]
    ConceptAbsent(Iri),
    #[error("graph has no typed entities")]
    NoTypedEntities,
}

/// Contribution of a single pattern: `(2p − 1)·[p > 1/2]`.
pub fn pattern_richness(p: Probability) -> Rational {
    if p.is_majority() {
        ratio(2 * p.matches() as i128 - p.total() as i128, p.total() as i128)
    } else {
        Rational::zero()
    }
}

/// `G` from raw counts: `Σ_{2c > n} (2c − n) / n`.
pub fn richness_from_counts<'a>(counts: impl IntoIterator<Item = &'a u64>, total: u64) -> Rational {
    assert!(total > 0, "richness of an empty profile");
    let n = total as i128;
    let numerator: i128 = counts
        .into_iter()
        .map(|&c| 2 * c as i128 - n)
        .filter(|&d| d > 0)
        .sum();
    ratio(numerator, n)
}

/// `μ = Σ_{i∈I} p(i, α, S)`.
pub fn expected_pattern_count(profile: &ConceptProfile) -> Result<Rational, RichnessError> {
    profile.require_nonempty()?;
    let matches: u64 = profile.pattern_counts().values().sum();
    Ok(ratio(matches as i128, profile.total() as i128))
}

/// Patterns matched by strictly more than half of the entities.
pub fn characteristic_set(profile: &ConceptProfile) -> Result<BTreeSet<Pattern>, RichnessError> {
    profile.require_nonempty()?;
    let n = profile.total();
    Ok(profile
        .pattern_counts()
        .iter()
        .filter(|(_, &c)| Probability::new(c, n).is_majority())
        .map(|(p, _)| p.clone())
        .collect())
}

/// `G(α, S)` without building a full report.
pub fn richness_value(profile: &ConceptProfile) -> Result<Rational, RichnessError> {
    profile.require_nonempty()?;
    Ok(richness_from_counts(profile.pattern_counts().values(), profile.total()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RichnessReport {
    pub concept: Iri,
    pub total_entities: u64,
    #[serde(with = "exact_serde")]
    pub mu: Rational,
    #[serde(serialize_with = "serialize_patterns")]
    pub characteristic_set: BTreeSet<Pattern>,
    #[serde(rename = "g", with = "exact_serde")]
    pub g_value: Rational,
    /// Non-zero contributions, i.e. exactly the patterns of `Y`.
    #[serde(serialize_with = "serialize_per_pattern")]
    pub per_pattern: BTreeMap<Pattern, Rational>,
}

pub fn richness(profile: &ConceptProfile) -> Result<RichnessReport, RichnessError> {
    let mu = expected_pattern_count(profile)?;
    let n = profile.total();
    let per_pattern: BTreeMap<Pattern, Rational> = profile
        .pattern_counts()
        .iter()
        .map(|(pattern, &c)| (pattern, Probability::new(c, n)))
        .filter(|(_, p)| p.is_majority())
        .map(|(pattern, p)| (pattern.clone(), pattern_richness(p)))
        .collect();
    let g_value = sum(per_pattern.values());
    Ok(RichnessReport {
        concept: profile.concept().clone(),
        total_entities: n,
        mu,
        characteristic_set: per_pattern.keys().cloned().collect(),
        g_value,
        per_pattern,
    })
}

/// Entity-weighted mean of `G` over several sources.
pub fn weighted_mean<'a>(parts: impl IntoIterator<Item = (u64, &'a Rational)>) -> Option<Rational> {
    let mut weight = 0i128;
    let mut acc = Rational::zero();
    for (n, g) in parts {
        weight += n as i128;
        acc += g * Rational::from_integer(n as i128);
    }
    (weight > 0).then(|| acc / Rational::from_integer(weight))
}

/// `(|S₁|·G(S₁) + |S₂|·G(S₂)) / (|S₁| + |S₂|)`.
pub fn weighted_average_richness(a: &ConceptProfile, b: &ConceptProfile) -> Result<Rational, RichnessError> {
    let ga = richness_value(a)?;
    let gb = richness_value(b)?;
    Ok(weighted_mean([(a.total(), &ga), (b.total(), &gb)]).expect("both totals positive"))
}

/// Which branch of the per-pattern argument a pattern falls into, by its
/// source probabilities `w₁`, `w₂` and merged probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofCase {
    BothInfrequent,
    BothFrequent,
    OneFrequentMergedInfrequent,
    OneFrequentMergedFrequent,
}

impl ProofCase {
    pub const ALL: [ProofCase; 4] = [
        ProofCase::BothInfrequent,
        ProofCase::BothFrequent,
        ProofCase::OneFrequentMergedInfrequent,
        ProofCase::OneFrequentMergedFrequent,
    ];

    pub fn classify(w1: Probability, w2: Probability, merged: Probability) -> Self {
        match (w1.is_majority(), w2.is_majority()) {
            (false, false) => ProofCase::BothInfrequent,
            (true, true) => ProofCase::BothFrequent,
            _ if merged.is_majority() => ProofCase::OneFrequentMergedFrequent,
            _ => ProofCase::OneFrequentMergedInfrequent,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProofCase::BothInfrequent => "both-infrequent",
            ProofCase::BothFrequent => "both-frequent",
            ProofCase::OneFrequentMergedInfrequent => "one-frequent-merged-infrequent",
            ProofCase::OneFrequentMergedFrequent => "one-frequent-merged-frequent",
        }
    }
}

/// Per-pattern side of the decay inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternCheck {
    pub pattern: String,
    pub case: ProofCase,
    #[serde(with = "exact_serde")]
    pub w1: Rational,
    #[serde(with = "exact_serde")]
    pub w2: Rational,
    #[serde(with = "exact_serde")]
    pub merged_probability: Rational,
    /// Contribution in the merged profile.
    #[serde(with = "exact_serde")]
    pub lhs: Rational,
    /// Entity-weighted mean of the two source contributions.
    #[serde(with = "exact_serde")]
    pub rhs: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub concept: Iri,
    pub left_entities: u64,
    pub right_entities: u64,
    /// `G` of the merged profile.
    #[serde(with = "exact_serde")]
    pub lhs: Rational,
    /// Entity-weighted average of the two source `G` values.
    #[serde(with = "exact_serde")]
    pub rhs: Rational,
    /// `lhs ≤ rhs`, exactly.
    pub holds: bool,
    /// Every per-pattern inequality holds.
    pub per_pattern_holds: bool,
    #[serde(skip)]
    pub per_pattern: BTreeMap<Pattern, PatternCheck>,
    #[serde(rename = "per_pattern")]
    per_pattern_list: Vec<PatternCheck>,
}

impl TheoremCheck {
    pub fn case_counts(&self) -> BTreeMap<ProofCase, usize> {
        let mut counts = BTreeMap::new();
        for check in self.per_pattern.values() {
            *counts.entry(check.case).or_insert(0) += 1;
        }
        counts
    }
}

/// Checks `G(S₁ ∪ S₂) ≤ weighted average` for two disjoint profiles of the
/// same concept, along with the per-pattern inequality for every observed
/// pattern.
pub fn verify_decay(a: &ConceptProfile, b: &ConceptProfile) -> Result<TheoremCheck, RichnessError> {
    a.require_nonempty()?;
    b.require_nonempty()?;
    check_disjoint(a, b)?;
    let merged = merge_profiles(a, b, OverlapPolicy::Reject)?;

    let lhs = richness_value(&merged)?;
    let rhs = weighted_average_richness(a, b)?;

    let (n1, n2) = (a.total(), b.total());
    let mut per_pattern = BTreeMap::new();
    for (pattern, &c) in merged.pattern_counts() {
        let w1 = Probability::new(a.count(pattern), n1);
        let w2 = Probability::new(b.count(pattern), n2);
        let pm = Probability::new(c, n1 + n2);
        let p_lhs = pattern_richness(pm);
        let p_rhs = weighted_mean([(n1, &pattern_richness(w1)), (n2, &pattern_richness(w2))]).expect("positive totals");
        per_pattern.insert(
            pattern.clone(),
            PatternCheck {
                pattern: pattern.to_string(),
                case: ProofCase::classify(w1, w2, pm),
                w1: w1.to_rational(),
                w2: w2.to_rational(),
                merged_probability: pm.to_rational(),
                holds: p_lhs <= p_rhs,
                lhs: p_lhs,
                rhs: p_rhs,
            },
        );
    }
    debug_assert_eq!(sum(per_pattern.values().map(|c: &PatternCheck| &c.lhs)), lhs);
    debug_assert_eq!(sum(per_pattern.values().map(|c: &PatternCheck| &c.rhs)), rhs);

    Ok(TheoremCheck {
        concept: a.concept().clone(),
        left_entities: n1,
        right_entities: n2,
        holds: lhs <= rhs,
        per_pattern_holds: per_pattern.values().all(|c| c.holds),
        per_pattern_list: per_pattern.values().cloned().collect(),
        per_pattern,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcReport {
    pub concept: Iri,
    #[serde(with = "exact_serde")]
    pub p_alpha: Rational,
    /// `−log₂ p_alpha`.
    pub ic_value: f64,
}

/// Information content with `p(α)` taken as the share of typed entities
/// that are typed `concept`.
pub fn information_content(graph: &Graph, concept: &Iri) -> Result<IcReport, RichnessError> {
    let typed = graph.typed_entities().len();
    if typed == 0 {
        return Err(RichnessError::NoTypedEntities);
    }
    let members = graph.entities_of_type(concept).len();
    if members == 0 {
        return Err(RichnessError::ConceptAbsent(concept.clone()));
    }
    let p_alpha = ratio(members as i128, typed as i128);
    let ic_value = if members == typed {
        0.0
    } else {
        -(members as f64 / typed as f64).log2()
    };
    Ok(IcReport {
        concept: concept.clone(),
        p_alpha,
        ic_value,
    })
}

fn serialize_patterns<S: serde::Serializer>(set: &BTreeSet<Pattern>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(set.iter().map(|p| p.to_string()))
}

fn serialize_per_pattern<S: serde::Serializer>(map: &BTreeMap<Pattern, Rational>, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        pattern: String,
        #[serde(with = "exact_serde")]
        value: Rational,
    }
    s.collect_seq(map.iter().map(|(p, v)| Entry {
        pattern: p.to_string(),
        value: *v,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::FeatureSet;
    use crate::rdf::{vocab, Term, Triple};

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://ex.org/{s}")).unwrap()
    }

    fn pat(name: &str) -> Pattern {
        Pattern::new(iri(&format!("p{name}")), iri(&format!("o{name}")).into()).unwrap()
    }

    fn profile(prefix: &str, rows: &[&[&str]]) -> ConceptProfile {
        ConceptProfile::from_members(
            iri("C"),
            rows.iter().enumerate().map(|(k, row)| {
                let features: FeatureSet = row.iter().map(|n| pat(n)).collect();
                (Term::from(iri(&format!("{prefix}{k}"))), features)
            }),
        )
        .unwrap()
    }

    fn d1() -> ConceptProfile {
        profile("e", &[&["A", "B"], &["A", "B"], &["A"]])
    }

    fn d2() -> ConceptProfile {
        profile("f", &[&["A"], &["C"], &["C"]])
    }

    #[test]
    fn mu_values() {
        assert_eq!(expected_pattern_count(&d1()).unwrap(), ratio(5, 3));
        assert_eq!(expected_pattern_count(&profile("e", &[&["A", "B", "C", "D"]])).unwrap(), ratio(4, 1));
        assert_eq!(expected_pattern_count(&profile("e", &[&[], &[]])).unwrap(), ratio(0, 1));
        assert!(expected_pattern_count(&ConceptProfile::empty(iri("C"))).is_err());
    }

    #[test]
    fn characteristic_sets() {
        assert_eq!(characteristic_set(&d1()).unwrap(), [pat("A"), pat("B")].into_iter().collect());
        // p = 1/2 is not a majority
        assert!(characteristic_set(&profile("e", &[&["A"], &[]])).unwrap().is_empty());
        assert!(characteristic_set(&profile("e", &[&["A"], &["B"], &["C"]])).unwrap().is_empty());
    }

    #[test]
    fn richness_of_fixtures() {
        let r1 = richness(&d1()).unwrap();
        assert_eq!(r1.g_value, ratio(4, 3));
        assert_eq!(r1.per_pattern[&pat("A")], ratio(1, 1));
        assert_eq!(r1.per_pattern[&pat("B")], ratio(1, 3));
        assert_eq!(richness(&d2()).unwrap().g_value, ratio(1, 3));
        let merged = merge_profiles(&d1(), &d2(), OverlapPolicy::Reject).unwrap();
        assert_eq!(richness(&merged).unwrap().g_value, ratio(1, 3));
        assert_eq!(richness_value(&merged).unwrap(), ratio(1, 3));
    }

    #[test]
    fn weighted_average() {
        assert_eq!(weighted_average_richness(&d1(), &d2()).unwrap(), ratio(5, 6));
        let same = profile("g", &[&["A", "B"], &["A", "B"], &["A"]]);
        assert_eq!(weighted_average_richness(&d1(), &same).unwrap(), ratio(4, 3));
        assert!(weighted_average_richness(&d1(), &ConceptProfile::empty(iri("C"))).is_err());
    }

    #[test]
    fn decay_on_fixtures() {
        let check = verify_decay(&d1(), &d2()).unwrap();
        assert_eq!(check.lhs, ratio(1, 3));
        assert_eq!(check.rhs, ratio(5, 6));
        assert!(check.holds && check.per_pattern_holds);
        assert_eq!(check.per_pattern[&pat("A")].case, ProofCase::OneFrequentMergedFrequent);
        assert_eq!(check.per_pattern[&pat("B")].case, ProofCase::OneFrequentMergedInfrequent);
        assert_eq!(check.per_pattern[&pat("C")].case, ProofCase::OneFrequentMergedInfrequent);
    }

    #[test]
    fn decay_equality_when_shapes_match() {
        let twin = profile("g", &[&["A", "B"], &["A", "B"], &["A"]]);
        let check = verify_decay(&d1(), &twin).unwrap();
        assert_eq!(check.lhs, check.rhs);
        for c in check.per_pattern.values() {
            assert_eq!(c.case, ProofCase::BothFrequent);
            assert_eq!(c.lhs, c.rhs);
        }
    }

    #[test]
    fn decay_rejects_overlap() {
        assert!(matches!(
            verify_decay(&d1(), &d1()),
            Err(RichnessError::Profile(ProfileError::Overlap { .. }))
        ));
    }

    #[test]
    fn theorem_check_json() {
        let json = serde_json::to_value(verify_decay(&d1(), &d2()).unwrap()).unwrap();
        assert_eq!(json["lhs"]["exact"], "1/3");
        assert_eq!(json["rhs"]["exact"], "5/6");
        assert_eq!(json["per_pattern"].as_array().unwrap().len(), 3);
    }

    fn typed_graph(entities: &[(&str, &str)]) -> Graph {
        Graph::from_triples(
            entities
                .iter()
                .map(|(e, c)| Triple::new(iri(e).into(), vocab::rdf_type(), iri(c).into()).unwrap()),
        )
    }

    #[test]
    fn information_content_values() {
        let all = typed_graph(&[("a", "P"), ("b", "P")]);
        let r = information_content(&all, &iri("P")).unwrap();
        assert_eq!(r.p_alpha, ratio(1, 1));
        assert_eq!(r.ic_value, 0.0);
        assert!(r.ic_value.is_sign_positive());

        let half = typed_graph(&[("a", "P"), ("b", "Q")]);
        assert_eq!(information_content(&half, &iri("P")).unwrap().ic_value, 1.0);

        assert_eq!(
            information_content(&half, &iri("R")),
            Err(RichnessError::ConceptAbsent(iri("R")))
        );
        assert_eq!(
            information_content(&Graph::new(), &iri("R")),
            Err(RichnessError::NoTypedEntities)
        );
    }
}
