use super::term::Iri;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";

pub fn rdf_type() -> Iri {
    Iri::new(RDF_TYPE).expect("valid IRI")
}

pub fn rdfs_subclass_of() -> Iri {
    Iri::new(RDFS_SUBCLASS_OF).expect("valid IRI")
}
