//! RDF terms, an immutable indexed graph, and N-Triples I/O.

mod graph;
pub mod ntriples;
mod term;
pub mod vocab;

pub use graph::Graph;
pub use ntriples::{
    parse_ntriples, parse_ntriples_str, serialize_ntriples, write_ntriples, ErrorCategory, LineError,
    NTriplesError, ParseOptions, ParseOutcome,
};
pub use term::{Iri, Literal, Term, TermRepr, Triple};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RdfError {
    #[error("invalid IRI {0:?}: {1}")]
    InvalidIri(String, &'static str),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
    #[error("unknown term type {0:?}")]
    UnknownTermKind(String),
    #[error("a literal cannot be a subject")]
    LiteralSubject,
}
