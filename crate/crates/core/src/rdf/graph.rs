use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use super::term::{Iri, Term, Triple};
use super::vocab;

static NO_ENTITIES: BTreeSet<Term> = BTreeSet::new();

/// An immutable set of triples with a subject index and an
/// `rdf:type` index.
///
/// Triples are kept sorted, so every subject's statements form one
/// contiguous run.
#[derive(Clone, Default)]
pub struct Graph {
    triples: Vec<Triple>,
    by_subject: HashMap<Term, Range<usize>>,
    by_type: BTreeMap<Iri, BTreeSet<Term>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut triples: Vec<Triple> = triples.into_iter().collect();
        triples.sort_unstable();
        triples.dedup();

        let mut by_subject: HashMap<Term, Range<usize>> = HashMap::new();
        let mut by_type: BTreeMap<Iri, BTreeSet<Term>> = BTreeMap::new();
        let mut start = 0;
        for i in 0..triples.len() {
            let t = &triples[i];
            if i + 1 == triples.len() || triples[i + 1].subject() != t.subject() {
                by_subject.insert(t.subject().clone(), start..i + 1);
                start = i + 1;
            }
            if t.predicate().as_str() == vocab::RDF_TYPE {
                if let Term::Iri(class) = t.object() {
                    by_type
                        .entry(class.clone())
                        .or_default()
                        .insert(t.subject().clone());
                }
            }
        }

        Graph {
            triples,
            by_subject,
            by_type,
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Triples in sorted order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.binary_search(triple).is_ok()
    }

    pub fn outgoing(&self, subject: &Term) -> &[Triple] {
        match self.by_subject.get(subject) {
            Some(range) => &self.triples[range.clone()],
            None => &[],
        }
    }

    pub fn subjects(&self) -> impl Iterator<Item = &Term> {
        self.by_subject.keys()
    }

    /// Subjects of `(?, rdf:type, concept)`.
    pub fn entities_of_type(&self, concept: &Iri) -> &BTreeSet<Term> {
        self.by_type.get(concept).unwrap_or(&NO_ENTITIES)
    }

    /// Every class used as the object of an `rdf:type` triple.
    pub fn classes(&self) -> impl Iterator<Item = &Iri> {
        self.by_type.keys()
    }

    /// Subjects with at least one IRI-valued `rdf:type`.
    pub fn typed_entities(&self) -> BTreeSet<&Term> {
        self.by_type.values().flatten().collect()
    }

    /// `(child, parent)` pairs from `rdfs:subClassOf` triples between IRIs.
    pub fn subclass_edges(&self) -> Vec<(Iri, Iri)> {
        self.triples
            .iter()
            .filter(|t| t.predicate().as_str() == vocab::RDFS_SUBCLASS_OF)
            .filter_map(|t| match (t.subject(), t.object()) {
                (Term::Iri(child), Term::Iri(parent)) => Some((child.clone(), parent.clone())),
                _ => None,
            })
            .collect()
    }

    /// Set union. Blank-node labels are compared verbatim, so callers
    /// merging separately parsed documents should parse them with
    /// distinct blank-node scopes.
    pub fn union(&self, other: &Graph) -> Graph {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        Graph::from_triples(self.triples.iter().chain(other.triples.iter()).cloned())
    }

    /// A new graph with `extra` added.
    pub fn with_triples(&self, extra: impl IntoIterator<Item = Triple>) -> Graph {
        Graph::from_triples(self.triples.iter().cloned().chain(extra))
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Graph {}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.triples.iter()).finish()
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph::from_triples(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://ex.org/{s}")).unwrap()
    }

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(iri(s).into(), iri(p), iri(o).into()).unwrap()
    }

    fn typed(s: &str, c: &str) -> Triple {
        Triple::new(iri(s).into(), vocab::rdf_type(), iri(c).into()).unwrap()
    }

    #[test]
    fn duplicates_collapse() {
        let g = Graph::from_triples(vec![t("a", "p", "b"), t("a", "p", "b")]);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn union_with_shared_triple() {
        let g1 = Graph::from_triples(vec![t("a", "p", "1"), t("a", "p", "2"), t("b", "p", "3")]);
        let g2 = Graph::from_triples(vec![t("b", "p", "3"), t("c", "p", "4"), t("d", "p", "5")]);
        let u = g1.union(&g2);
        assert_eq!(u.len(), 5);
        assert_eq!(g1.union(&Graph::new()), g1);
        assert_eq!(g1.union(&g1), g1);
        assert_eq!(u, g2.union(&g1));
    }

    #[test]
    fn entities_of_type_index() {
        let g = Graph::from_triples(vec![
            typed("e1", "C"),
            typed("e2", "C"),
            typed("e3", "C"),
            typed("e4", "D"),
            typed("e1", "D"),
        ]);
        let c: Vec<_> = g.entities_of_type(&iri("C")).iter().cloned().collect();
        assert_eq!(c, vec![iri("e1").into(), iri("e2").into(), iri("e3").into()]);
        assert!(g.entities_of_type(&iri("D")).contains(&Term::from(iri("e1"))));
        assert!(g.entities_of_type(&iri("Nope")).is_empty());
        assert_eq!(g.typed_entities().len(), 4);
    }

    #[test]
    fn outgoing_runs() {
        let g = Graph::from_triples(vec![t("a", "p", "1"), t("b", "p", "2"), t("a", "q", "3")]);
        assert_eq!(g.outgoing(&iri("a").into()).len(), 2);
        assert_eq!(g.outgoing(&iri("b").into()).len(), 1);
        assert!(g.outgoing(&iri("z").into()).is_empty());
    }
}
