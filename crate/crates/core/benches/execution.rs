use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semrich::rational::ratio;
use semrich::synth::{generate_source, PatternSpec, Realization, SourceSpec, TargetProbability};
use semrich::{build_profile, build_profile_with, score_candidates, Candidate, Execution, Iri, Pattern};

fn iri(s: String) -> Iri {
    Iri::new(s).unwrap()
}

fn spec(n: u64) -> SourceSpec {
    SourceSpec {
        concept: iri("http://example.org/Person".into()),
        n_entities: n,
        patterns: (0..40)
            .map(|j| PatternSpec {
                predicate: iri(format!("http://example.org/p{}", j % 8)),
                object: iri(format!("http://example.org/o{j}")).into(),
                probability: TargetProbability(ratio(j + 1, 41)),
            })
            .collect(),
        seed: 1,
        entity_prefix: None,
        realization: Realization::Exact,
    }
}

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn profiles(c: &mut Criterion) {
    let s = spec(20_000);
    let graph = generate_source(&s).unwrap();
    let mut group = c.benchmark_group("build_profile");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::new(name, s.n_entities), |b| {
            b.iter(|| build_profile_with(&graph, &s.concept, exec))
        });
    }
    group.finish();
}

fn candidates(c: &mut Criterion) {
    let s = spec(2_000);
    let profile = build_profile(&generate_source(&s).unwrap(), &s.concept);
    let patterns: Vec<Pattern> = profile.pattern_counts().keys().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let batch: Vec<Candidate> = (0..20_000)
        .map(|i| Candidate {
            entity: iri(format!("http://example.org/c{i}")).into(),
            features: patterns.iter().filter(|_| rng.random_bool(0.5)).cloned().collect(),
        })
        .collect();
    let mut group = c.benchmark_group("score_candidates");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::new(name, batch.len()), |b| {
            b.iter(|| score_candidates(&profile, &batch, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, profiles, candidates);
criterion_main!(benches);
