//! Reading input graphs: N-Triples files or cache directories written by
//! `fetch`.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use semrich::rdf::{parse_ntriples, NTriplesError, ParseOptions};
use semrich::Graph;
use serde_json::json;

use crate::error::{emit, CliError};

/// Loads one source. Malformed lines are warnings unless `strict`, in
/// which case every one of them is reported and loading fails.
/// `scope`, when given, keeps this source's blank nodes apart from others.
pub fn load_source(path: &Path, scope: Option<&str>, strict: bool, diag: &mut impl Write) -> Result<Graph, CliError> {
    if path.is_dir() {
        return Ok(semrich_acquire::load_concept_dir(path)?);
    }
    let file = File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut options = ParseOptions::default();
    if let Some(scope) = scope {
        options = options.scoped(scope);
    }
    let outcome = parse_ntriples(BufReader::new(file), &options).map_err(|e| match e {
        NTriplesError::Io(e) => CliError::data(format!("{}: {e}", path.display())),
        NTriplesError::Line(e) => CliError::data(format!("{}: {e}", path.display())),
    })?;
    if outcome.errors.is_empty() {
        return Ok(outcome.graph);
    }
    let file = path.display().to_string();
    let details: Vec<_> = outcome
        .errors
        .iter()
        .map(|e| {
            json!({
                "level": if strict { "error" } else { "warning" },
                "kind": "parse",
                "file": file,
                "line": e.line,
                "category": e.category,
                "message": e.message,
            })
        })
        .collect();
    if strict {
        return Err(CliError::Data {
            message: format!("{file}: {} malformed line(s)", details.len()),
            details,
        });
    }
    for d in &details {
        let _ = writeln!(diag, "{d}");
    }
    emit(
        diag,
        "warning",
        "parse",
        &format!("{file}: skipped {} malformed line(s)", details.len()),
        None::<()>,
    );
    Ok(outcome.graph)
}

/// Union of all inputs. With more than one input, blank nodes are
/// scoped per file.
pub fn load_union(paths: &[PathBuf], strict: bool, diag: &mut impl Write) -> Result<Graph, CliError> {
    if paths.is_empty() {
        return Err(CliError::Usage("at least one --input is required".into()));
    }
    let scoped = paths.len() > 1;
    let mut graph = Graph::new();
    for (i, path) in paths.iter().enumerate() {
        let scope = scoped.then(|| format!("f{i}"));
        let g = load_source(path, scope.as_deref(), strict, diag)?;
        graph = if graph.is_empty() { g } else { graph.union(&g) };
    }
    Ok(graph)
}

/// Loads each input as its own source.
pub fn load_each(paths: &[PathBuf], strict: bool, diag: &mut impl Write) -> Result<Vec<(String, Graph)>, CliError> {
    paths
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let g = load_source(path, Some(&format!("s{i}")), strict, diag)?;
            Ok((source_id(path), g))
        })
        .collect()
}

/// Display name for a source: its file stem, or the directory name.
pub fn source_id(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
