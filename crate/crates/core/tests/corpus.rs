use std::fs;
use std::path::PathBuf;

use semrich::rdf::{parse_ntriples_str, serialize_ntriples, ParseOptions};

fn corpus() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fixtures");
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "nt"))
        .collect();
    files.sort();
    assert!(files.len() >= 5);
    files
}

#[test]
fn corpus_round_trips() {
    for path in corpus() {
        let text = fs::read_to_string(&path).unwrap();
        let g = parse_ntriples_str(&text, &ParseOptions::strict())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
            .graph;
        assert!(!g.is_empty(), "{}", path.display());
        let out = serialize_ntriples(&g);
        let back = parse_ntriples_str(std::str::from_utf8(&out).unwrap(), &ParseOptions::strict()).unwrap().graph;
        assert_eq!(back, g, "{}", path.display());
        assert_eq!(serialize_ntriples(&back), out, "{}", path.display());
    }
}

#[test]
fn lexical_forms_stay_distinct() {
    let text = fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fixtures/literals.nt")).unwrap();
    let g = parse_ntriples_str(&text, &ParseOptions::strict()).unwrap().graph;
    // "42" and "042" are different terms
    assert_eq!(g.len(), 7);
}
