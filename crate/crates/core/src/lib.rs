//! Semantic richness of concepts in RDF graphs.
//!
//! A concept's richness `G` counts how many facts about its instances can
//! be predicted, net of wrong predictions, from membership alone. Merging
//! disjoint sources of the same concept never raises `G` above the
//! entity-weighted average of the sources; [`richness::verify_decay`]
//! checks that inequality exactly, pattern by pattern.

pub mod exec;
pub mod profile;
pub mod rational;
pub mod rdf;
pub mod richness;
pub mod sample;
pub mod synth;
pub mod typicality;

pub use exec::Execution;
pub use profile::{
    build_profile, build_profile_for, build_profile_with, entity_features, merge_profiles, pattern_probability,
    ConceptProfile, FeatureSet, OverlapPolicy, Pattern, ProfileDocument, ProfileError,
};
pub use rational::{Probability, Rational};
pub use rdf::{Graph, Iri, Literal, Term, Triple};
pub use richness::{
    characteristic_set, expected_pattern_count, information_content, richness, richness_value, verify_decay,
    weighted_average_richness, IcReport, ProofCase, RichnessError, RichnessReport, TheoremCheck,
};
pub use sample::sample_entities;
pub use typicality::{
    induce_subconcept, more_typical, richness_delta_on_add, score_candidates, typicality, Candidate,
    CandidateReport, Classification, TypicalityError, TypicalityScore,
};
