//! Richness across a subclass hierarchy: per-concept `G` on capped
//! samples, per-edge deltas and parent-versus-children comparisons.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use semrich::rational::exact_serde;
use semrich::richness::weighted_mean;
use semrich::{build_profile_for, richness_value, sample_entities, Execution, Graph, Iri, Rational, Term};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptRow {
    pub concept: Iri,
    /// Breadth-first distance from the root.
    pub depth: u32,
    pub entities: u64,
    pub sampled: u64,
    #[serde(with = "exact_serde")]
    pub g: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRow {
    pub child: Iri,
    pub parent: Iri,
    #[serde(with = "exact_serde")]
    pub child_g: Rational,
    #[serde(with = "exact_serde")]
    pub parent_g: Rational,
    /// `child_g − parent_g`.
    #[serde(with = "exact_serde")]
    pub delta: Rational,
    pub increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParentRow {
    pub parent: Iri,
    #[serde(with = "exact_serde")]
    pub parent_g: Rational,
    pub children: usize,
    /// Children's `G` weighted by their sampled entity counts.
    #[serde(with = "exact_serde")]
    pub children_mean: Rational,
    pub parent_at_most_mean: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeReport {
    pub root: Iri,
    pub cap: u64,
    pub seed: u64,
    pub concepts: Vec<ConceptRow>,
    pub edges: Vec<EdgeRow>,
    pub parents: Vec<ParentRow>,
    /// Share of edges with a positive delta; `None` without edges.
    #[serde(with = "optional_fraction")]
    pub fraction_increasing: Option<Rational>,
    /// Share of parents whose `G` is at most their children's mean.
    #[serde(with = "optional_fraction")]
    pub fraction_parent_at_most_mean: Option<Rational>,
}

#[derive(Debug, thiserror::Error)]
pub enum TreeError {
    #[error("root concept {0} has no entities and no subclasses")]
    RootAbsent(Iri),
}

/// Concepts reachable from `root` via `rdfs:subClassOf`, breadth first,
/// with their depth.
pub fn descendants(graph: &Graph, root: &Iri) -> Vec<(Iri, u32)> {
    let mut children: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for (child, parent) in graph.subclass_edges() {
        children.entry(parent).or_default().push(child);
    }
    let mut seen = BTreeSet::from([root.clone()]);
    let mut order = Vec::new();
    let mut queue = VecDeque::from([(root.clone(), 0u32)]);
    while let Some((node, depth)) = queue.pop_front() {
        for child in children.get(&node).into_iter().flatten() {
            if seen.insert(child.clone()) {
                queue.push_back((child.clone(), depth + 1));
            }
        }
        order.push((node, depth));
    }
    order
}

pub fn tree_report(graph: &Graph, root: &Iri, cap: u64, seed: u64, exec: Execution) -> Result<TreeReport, TreeError> {
    let nodes = descendants(graph, root);
    if nodes.len() == 1 && graph.entities_of_type(root).is_empty() {
        return Err(TreeError::RootAbsent(root.clone()));
    }
    let populated: Vec<(Iri, u32)> = nodes
        .into_iter()
        .filter(|(c, _)| !graph.entities_of_type(c).is_empty())
        .collect();
    let concepts: Vec<ConceptRow> = exec.map(&populated, |(concept, depth)| {
        let members: Vec<Term> = graph.entities_of_type(concept).iter().cloned().collect();
        let sample = sample_entities(&members, cap as usize, seed);
        let profile = build_profile_for(graph, concept, &sample);
        ConceptRow {
            concept: concept.clone(),
            depth: *depth,
            entities: members.len() as u64,
            sampled: profile.total(),
            g: richness_value(&profile).expect("populated concept"),
        }
    });
    let by_concept: BTreeMap<&Iri, &ConceptRow> = concepts.iter().map(|r| (&r.concept, r)).collect();

    let mut edges: Vec<EdgeRow> = graph
        .subclass_edges()
        .into_iter()
        .filter_map(|(child, parent)| {
            let (c, p) = (by_concept.get(&child)?, by_concept.get(&parent)?);
            let delta = c.g - p.g;
            Some(EdgeRow {
                child,
                parent,
                child_g: c.g,
                parent_g: p.g,
                delta,
                increasing: delta > Rational::from_integer(0),
            })
        })
        .collect();
    edges.sort_by(|a, b| (&a.parent, &a.child).cmp(&(&b.parent, &b.child)));

    let mut grouped: BTreeMap<&Iri, Vec<&ConceptRow>> = BTreeMap::new();
    for e in &edges {
        grouped.entry(&e.parent).or_default().push(by_concept[&e.child]);
    }
    let parents: Vec<ParentRow> = grouped
        .into_iter()
        .map(|(parent, kids)| {
            let parent_g = by_concept[parent].g;
            let children_mean = weighted_mean(kids.iter().map(|k| (k.sampled, &k.g))).expect("children have entities");
            ParentRow {
                parent: parent.clone(),
                parent_g,
                children: kids.len(),
                children_mean,
                parent_at_most_mean: parent_g <= children_mean,
            }
        })
        .collect();

    let fraction = |hits: usize, of: usize| (of > 0).then(|| Rational::new(hits as i128, of as i128));
    Ok(TreeReport {
        root: root.clone(),
        cap,
        seed,
        fraction_increasing: fraction(edges.iter().filter(|e| e.increasing).count(), edges.len()),
        fraction_parent_at_most_mean: fraction(parents.iter().filter(|p| p.parent_at_most_mean).count(), parents.len()),
        concepts,
        edges,
        parents,
    })
}

mod optional_fraction {
    use semrich::rational::ExactJson;
    use semrich::Rational;
    use serde::Serialize;

    pub fn serialize<S: serde::Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => ExactJson::from(r).serialize(s),
            None => s.serialize_str("n/a"),
        }
    }
}
