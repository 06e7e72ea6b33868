use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use semrich::rational::{render, to_f64, to_fraction_string};
use semrich::rdf::{parse_ntriples, serialize_ntriples, ParseOptions};
use semrich::richness::{ProofCase, RichnessReport};
use semrich::synth::{generate_ontology, generate_source, SynthDocument};
use semrich::{
    build_profile_with, entity_features, induce_subconcept, information_content, richness, score_candidates, verify_decay, Candidate,
    ConceptProfile, Execution, FeatureSet, Graph, IcReport, Iri, OverlapPolicy, Term,
};
use semrich_acquire::{run_fetch, CacheMode, FetchConfig};
use serde::Serialize;

use crate::decay::{decay_report, DecayError};
use crate::error::{emit, exit, CliError};
use crate::load::{load_each, load_union};
use crate::svg::decay_svg;
use crate::tree::{tree_report, TreeError};

#[derive(Debug, Parser)]
#[command(name = "semrich", version, about = "Semantic richness reports for RDF concepts")]
pub struct Cli {
    /// Run batch work on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// N-Triples file or fetched cache directory; repeat for more.
    #[arg(long = "input", short = 'i', required = true)]
    pub inputs: Vec<PathBuf>,
    /// Fail on any malformed line instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

fn parse_iri(s: &str) -> Result<Iri, String> {
    Iri::parse_lenient(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Richness report for one concept over the union of the inputs.
    Richness {
        #[command(flatten)]
        inputs: Inputs,
        /// Concept IRI; members are subjects typed with it.
        #[arg(long, value_parser = parse_iri)]
        concept: Iri,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Decay curves: each input is a source; every source in turn absorbs the others.
    Decay {
        #[command(flatten)]
        inputs: Inputs,
        /// Concept IRI; members are subjects typed with it.
        #[arg(long, value_parser = parse_iri)]
        concept: Iri,
        /// Foreign entities added between recomputations.
        #[arg(long, default_value_t = 100)]
        chunk: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Also write an SVG plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Merge features of entities present in several sources instead of failing.
        #[arg(long)]
        union_overlap: bool,
    },
    /// Richness along the subclass tree below a root concept.
    Tree {
        #[command(flatten)]
        inputs: Inputs,
        /// Root of the hierarchy.
        #[arg(long, value_parser = parse_iri)]
        concept: Iri,
        /// Entities sampled per concept.
        #[arg(long, default_value_t = 1000)]
        cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Typicality and richness effect of candidate entities.
    Typicality {
        #[command(flatten)]
        inputs: Inputs,
        /// Concept IRI; members are subjects typed with it.
        #[arg(long, value_parser = parse_iri)]
        concept: Iri,
        /// One entity IRI per line (features come from the inputs), or an
        /// `.nt` file whose subjects are the candidates.
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Also write the input plus a sub-concept of the typical members here.
        #[arg(long)]
        induce: Option<PathBuf>,
    },
    /// Sample concept members from the configured endpoints into the cache.
    Fetch {
        /// JSON fetch configuration.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides every endpoint's entity cap.
        #[arg(long)]
        cap: Option<u64>,
        /// Overrides the configured cache mode.
        #[arg(long, value_enum)]
        cache_mode: Option<CacheModeArg>,
    },
    /// Generate synthetic N-Triples from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Output file; a directory for multi-source specs. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the decay inequality for every pair of inputs.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        /// Concept IRI; members are subjects typed with it.
        #[arg(long, value_parser = parse_iri)]
        concept: Iri,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CacheModeArg {
    Prefer,
    Refresh,
    Offline,
}

impl From<CacheModeArg> for CacheMode {
    fn from(m: CacheModeArg) -> Self {
        match m {
            CacheModeArg::Prefer => CacheMode::Prefer,
            CacheModeArg::Refresh => CacheMode::Refresh,
            CacheModeArg::Offline => CacheMode::Offline,
        }
    }
}

/// Parses `args` and runs the command. Returns the exit code.
pub fn run_args<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            if code == exit::OK {
                let _ = write!(out, "{e}");
            } else {
                emit(err, "error", "usage", e.to_string().trim_end(), None::<()>);
            }
            code
        }
    }
}

pub fn run(cli: Cli, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let result = match cli.command {
        Command::Richness { inputs, concept, format } => cmd_richness(&inputs, &concept, format, out, err),
        Command::Decay {
            inputs,
            concept,
            chunk,
            seed,
            format,
            svg,
            union_overlap,
        } => {
            let policy = if union_overlap {
                OverlapPolicy::UnionFeatures
            } else {
                OverlapPolicy::Reject
            };
            cmd_decay(&inputs, &concept, chunk, seed, format, svg.as_deref(), policy, exec, out, err)
        }
        Command::Tree {
            inputs,
            concept,
            cap,
            seed,
            format,
        } => cmd_tree(&inputs, &concept, cap, seed, format, exec, out, err),
        Command::Typicality {
            inputs,
            concept,
            candidates,
            format,
            induce,
        } => cmd_typicality(&inputs, &concept, &candidates, format, induce.as_deref(), exec, out, err),
        Command::Fetch {
            config,
            seed,
            cap,
            cache_mode,
        } => cmd_fetch(&config, seed, cap, cache_mode.map(Into::into), out, err),
        Command::Synth { spec, out: target } => cmd_synth(&spec, target.as_deref(), out),
        Command::Verify { inputs, concept, format } => cmd_verify(&inputs, &concept, format, exec, out, err),
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            e.report(err);
            e.exit_code()
        }
    }
}

fn require_format(format: Format, allowed: &[Format], command: &str) -> Result<(), CliError> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{command} does not support --format {format:?}").to_lowercase()))
    }
}

fn profile_of(graph: &Graph, concept: &Iri, exec: Execution) -> Result<ConceptProfile, CliError> {
    let profile = build_profile_with(graph, concept, exec);
    if profile.is_empty() {
        return Err(CliError::data(format!("concept {concept} has no entities in the input")));
    }
    Ok(profile)
}

#[derive(Serialize)]
struct RichnessOutput<'a> {
    #[serde(flatten)]
    report: &'a RichnessReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    ic: Option<&'a IcReport>,
}

fn cmd_richness(inputs: &Inputs, concept: &Iri, format: Format, out: &mut impl Write, err: &mut impl Write) -> Result<(), CliError> {
    let graph = load_union(&inputs.inputs, inputs.strict, err)?;
    let profile = profile_of(&graph, concept, Execution::default())?;
    let report = richness(&profile)?;
    let ic = information_content(&graph, concept).ok();
    match format {
        Format::Text => {
            writeln!(out, "concept: {}", report.concept)?;
            writeln!(out, "entities: {}", report.total_entities)?;
            writeln!(out, "mu: {}", render(&report.mu))?;
            writeln!(out, "G: {}", render(&report.g_value))?;
            if let Some(ic) = &ic {
                writeln!(out, "IC: {:.4} (p = {})", ic.ic_value, to_fraction_string(&ic.p_alpha))?;
            }
            writeln!(out, "Y: {} pattern(s)", report.per_pattern.len())?;
            for (pattern, contribution) in &report.per_pattern {
                let p = profile.probability(pattern)?;
                writeln!(
                    out,
                    "  {pattern}  p = {}  contributes {}",
                    to_fraction_string(&p.to_rational()),
                    render(contribution)
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &RichnessOutput { report: &report, ic: ic.as_ref() })?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["concept", "entities", "mu", "mu_approx", "g", "g_approx", "characteristic_patterns", "ic"])?;
            w.write_record([
                report.concept.as_str().to_owned(),
                report.total_entities.to_string(),
                to_fraction_string(&report.mu),
                format!("{:.6}", to_f64(&report.mu)),
                to_fraction_string(&report.g_value),
                format!("{:.6}", to_f64(&report.g_value)),
                report.per_pattern.len().to_string(),
                ic.map(|ic| format!("{:.6}", ic.ic_value)).unwrap_or_default(),
            ])?;
            w.flush()?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_decay(
    inputs: &Inputs,
    concept: &Iri,
    chunk: u64,
    seed: u64,
    format: Format,
    svg: Option<&Path>,
    policy: OverlapPolicy,
    exec: Execution,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<(), CliError> {
    require_format(format, &[Format::Csv, Format::Json], "decay")?;
    if inputs.inputs.len() < 2 {
        return Err(CliError::Usage(format!(
            "decay needs at least two sources, got {}",
            inputs.inputs.len()
        )));
    }
    let mut sources = Vec::new();
    for (id, graph) in load_each(&inputs.inputs, inputs.strict, err)? {
        let profile = profile_of(&graph, concept, exec).map_err(|_| CliError::data(format!("source {id} has no entities of {concept}")))?;
        sources.push((id, profile));
    }
    let report = decay_report(concept, &sources, chunk, seed, policy, exec).map_err(|e| match e {
        DecayError::TooFewSources(_) | DecayError::ZeroChunk => CliError::Usage(e.to_string()),
        DecayError::Profile(semrich::ProfileError::Overlap { count, sample }) => CliError::Data {
            message: format!("sources share {count} entities; pass --union-overlap to merge them"),
            details: vec![serde_json::json!({
                "level": "error",
                "kind": "overlap",
                "count": count,
                "entities": sample.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            })],
        },
        other => CliError::data(other.to_string()),
    })?;
    if let Some(path) = svg {
        fs::write(path, decay_svg(&report))?;
    }
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
        _ => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["base", "step", "added", "entities", "g", "g_approx", "weighted_average"])?;
            let avg = to_fraction_string(&report.weighted_average);
            for curve in &report.curves {
                for (i, s) in curve.steps.iter().enumerate() {
                    w.write_record([
                        curve.base.clone(),
                        i.to_string(),
                        s.added.to_string(),
                        s.entities.to_string(),
                        to_fraction_string(&s.g),
                        format!("{:.6}", to_f64(&s.g)),
                        avg.clone(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    emit(
        err,
        "info",
        "decay",
        "summary",
        Some(serde_json::json!({
            "weighted_average": to_fraction_string(&report.weighted_average),
            "merged": to_fraction_string(&report.merged),
        })),
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_tree(
    inputs: &Inputs,
    root: &Iri,
    cap: u64,
    seed: u64,
    format: Format,
    exec: Execution,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<(), CliError> {
    require_format(format, &[Format::Csv, Format::Json], "tree")?;
    if cap == 0 {
        return Err(CliError::Usage("--cap must be positive".into()));
    }
    let graph = load_union(&inputs.inputs, inputs.strict, err)?;
    let report = tree_report(&graph, root, cap, seed, exec).map_err(|e: TreeError| CliError::data(e.to_string()))?;
    let fraction = |f: &Option<semrich::Rational>| f.map(|r| to_fraction_string(&r)).unwrap_or_else(|| "n/a".into());
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
        _ => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["child", "parent", "child_g", "parent_g", "delta", "delta_approx", "increasing"])?;
            for e in &report.edges {
                w.write_record([
                    e.child.as_str().to_owned(),
                    e.parent.as_str().to_owned(),
                    to_fraction_string(&e.child_g),
                    to_fraction_string(&e.parent_g),
                    to_fraction_string(&e.delta),
                    format!("{:.6}", to_f64(&e.delta)),
                    e.increasing.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    emit(
        err,
        "info",
        "tree",
        "summary",
        Some(serde_json::json!({
            "concepts": report.concepts.len(),
            "edges": report.edges.len(),
            "fraction_increasing": fraction(&report.fraction_increasing),
            "fraction_parent_at_most_mean": fraction(&report.fraction_parent_at_most_mean),
        })),
    );
    Ok(())
}

/// `<parent>#typical-<first 12 hex digits of the profile document's SHA-256>`.
pub fn subconcept_iri(profile: &ConceptProfile) -> Result<Iri, CliError> {
    use sha2::{Digest, Sha256};
    let doc = serde_json::to_vec(&profile.to_document())?;
    let hash = hex::encode(Sha256::digest(&doc));
    let base = profile.concept().as_str();
    let sep = if base.contains('#') { "-" } else { "#" };
    Iri::new(format!("{base}{sep}typical-{}", &hash[..12])).map_err(|e| CliError::data(e.to_string()))
}

/// Candidates from a plain IRI list (features looked up in `graph`) or
/// from an N-Triples file (its subjects, with their own triples).
fn read_candidates(path: &Path, graph: &Graph, concept: &Iri) -> Result<Vec<Candidate>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let from_graph = |g: &Graph, entity: Term| {
        let features: FeatureSet = entity_features(g, &entity, concept);
        Candidate { entity, features }
    };
    if path.extension().is_some_and(|x| x == "nt") {
        let parsed = parse_ntriples(text.as_bytes(), &ParseOptions::strict().scoped("cand"))
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let subjects: Vec<Term> = parsed.graph.subjects().cloned().collect();
        return Ok(subjects.into_iter().map(|s| from_graph(&parsed.graph, s)).collect());
    }
    text.lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            let iri = Iri::parse_lenient(l)
                .map_err(|e| CliError::data(format!("{}: line {}: {e}", path.display(), i + 1)))?;
            Ok(from_graph(graph, Term::Iri(iri)))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_typicality(
    inputs: &Inputs,
    concept: &Iri,
    candidates: &Path,
    format: Format,
    induce: Option<&Path>,
    exec: Execution,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<(), CliError> {
    require_format(format, &[Format::Csv, Format::Json], "typicality")?;
    let graph = load_union(&inputs.inputs, inputs.strict, err)?;
    let profile = profile_of(&graph, concept, exec)?;
    if let Some(path) = induce {
        let sub = induce_subconcept(&graph, concept, &subconcept_iri(&profile)?)?;
        fs::write(path, serialize_ntriples(&sub.graph))?;
        emit(
            err,
            "info",
            "induce",
            "sub-concept written",
            Some(serde_json::json!({
                "concept": sub.concept.as_str(),
                "members": sub.members.len(),
                "parent_g": to_fraction_string(&sub.parent_g),
                "sub_g": sub.sub_g.map(|g| to_fraction_string(&g)),
            })),
        );
    }
    let candidates = read_candidates(candidates, &graph, concept)?;
    let reports = score_candidates(&profile, &candidates, exec)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &reports)?;
            writeln!(out)?;
        }
        _ => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record([
                "entity",
                "delta",
                "delta_approx",
                "classification",
                "richness_delta",
                "richness_delta_approx",
                "typical_but_lowers_g",
            ])?;
            for r in &reports {
                w.write_record([
                    r.score.entity.to_string(),
                    to_fraction_string(&r.score.delta),
                    format!("{:.6}", to_f64(&r.score.delta)),
                    r.score.classification.as_str().to_owned(),
                    r.richness_delta.map(|d| to_fraction_string(&d)).unwrap_or_default(),
                    r.richness_delta.map(|d| format!("{:.6}", to_f64(&d))).unwrap_or_default(),
                    r.contradicts_typical_claim().to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    let flagged: Vec<String> = reports
        .iter()
        .filter(|r| r.contradicts_typical_claim())
        .map(|r| r.score.entity.to_string())
        .collect();
    if !flagged.is_empty() {
        emit(
            err,
            "warning",
            "typicality",
            "typical candidates that would lower G",
            Some(serde_json::json!({ "count": flagged.len(), "entities": flagged })),
        );
    }
    Ok(())
}

fn cmd_fetch(
    config: &Path,
    seed: Option<u64>,
    cap: Option<u64>,
    cache_mode: Option<CacheMode>,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<(), CliError> {
    let text = fs::read_to_string(config).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let mut config: FetchConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(mode) = cache_mode {
        config.cache_mode = mode;
    }
    if let Some(cap) = cap {
        for endpoint in &mut config.endpoints {
            endpoint.max_entities = cap;
        }
    }
    let report = run_fetch(&config)?;
    for e in report.endpoints.iter().filter(|e| e.error.is_some()) {
        emit(
            err,
            "error",
            "endpoint",
            e.error.as_deref().unwrap_or_default(),
            Some(serde_json::json!({ "endpoint": e.endpoint })),
        );
    }
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    if report.all_failed() {
        return Err(CliError::Network("every endpoint failed".into()));
    }
    Ok(())
}

fn cmd_synth(spec: &Path, target: Option<&Path>, out: &mut impl Write) -> Result<(), CliError> {
    let text = fs::read_to_string(spec).map_err(|e| CliError::Usage(format!("{}: {e}", spec.display())))?;
    let doc: SynthDocument = serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", spec.display())))?;
    let single = |graph: Graph, out: &mut dyn Write| -> Result<(), CliError> {
        let bytes = serialize_ntriples(&graph);
        match target {
            Some(path) => fs::write(path, bytes)?,
            None => out.write_all(&bytes)?,
        }
        Ok(())
    };
    match doc {
        SynthDocument::Source(s) => single(generate_source(&s)?, out),
        SynthDocument::Ontology(o) => single(generate_ontology(&o)?, out),
        SynthDocument::Sources { sources } => {
            let dir = target.ok_or_else(|| CliError::Usage("multi-source specs need --out <directory>".into()))?;
            fs::create_dir_all(dir)?;
            for (i, s) in sources.iter().enumerate() {
                fs::write(dir.join(format!("source_{i:02}.nt")), serialize_ntriples(&generate_source(s)?))?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PairCheck<'a> {
    left: &'a str,
    right: &'a str,
    #[serde(flatten)]
    check: semrich::TheoremCheck,
}

fn cmd_verify(
    inputs: &Inputs,
    concept: &Iri,
    format: Format,
    exec: Execution,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<(), CliError> {
    require_format(format, &[Format::Csv, Format::Json], "verify")?;
    if inputs.inputs.len() < 2 {
        return Err(CliError::Usage("verify needs at least two sources".into()));
    }
    let mut sources = Vec::new();
    for (id, graph) in load_each(&inputs.inputs, inputs.strict, err)? {
        let profile = profile_of(&graph, concept, exec).map_err(|_| CliError::data(format!("source {id} has no entities of {concept}")))?;
        sources.push((id, profile));
    }
    let mut checks = Vec::new();
    for i in 0..sources.len() {
        for j in i + 1..sources.len() {
            checks.push(PairCheck {
                left: &sources[i].0,
                right: &sources[j].0,
                check: verify_decay(&sources[i].1, &sources[j].1)?,
            });
        }
    }
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &checks)?;
            writeln!(out)?;
        }
        _ => {
            let mut w = csv::Writer::from_writer(&mut *out);
            let mut header = vec!["left", "right", "left_entities", "right_entities", "lhs", "rhs", "holds"];
            header.extend(ProofCase::ALL.iter().map(|c| c.label()));
            w.write_record(&header)?;
            for c in &checks {
                let counts = c.check.case_counts();
                let mut row = vec![
                    c.left.to_owned(),
                    c.right.to_owned(),
                    c.check.left_entities.to_string(),
                    c.check.right_entities.to_string(),
                    to_fraction_string(&c.check.lhs),
                    to_fraction_string(&c.check.rhs),
                    c.check.holds.to_string(),
                ];
                row.extend(ProofCase::ALL.iter().map(|k| counts.get(k).copied().unwrap_or(0).to_string()));
                w.write_record(&row)?;
            }
            w.flush()?;
        }
    }
    let failed = checks.iter().filter(|c| !c.check.holds || !c.check.per_pattern_holds).count();
    if failed > 0 {
        return Err(CliError::data(format!("decay inequality violated for {failed} pair(s)")));
    }
    Ok(())
}
