use criterion::{black_box, criterion_group, criterion_main, Criterion};

use projsem_bench::{bench_env, sample_pga_term, sample_program};
use projsem_core::{bisimilar, extract_behavior, normalize, thread_extract, Notation};

fn bench_normalize(c: &mut Criterion) {
    let term = sample_pga_term();
    c.bench_function("normalize", |b| b.iter(|| normalize(black_box(&term))));
}

fn bench_thread_extract(c: &mut Criterion) {
    let cf = normalize(&sample_pga_term());
    c.bench_function("thread_extract", |b| b.iter(|| thread_extract(black_box(&cf))));
}

fn bench_behavior_chain(c: &mut Criterion) {
    let env = bench_env();
    let mut group = c.benchmark_group("behavior_chain");
    for notation in [Notation::Pgld, Notation::Pgldij, Notation::Pglcij, Notation::Pgldrj] {
        let program = sample_program(notation);
        group.bench_function(notation.name(), |b| {
            b.iter(|| black_box(&program).behavior(&env))
        });
    }
    group.finish();
}

fn bench_interpret(c: &mut Criterion) {
    let env = bench_env();
    let program = sample_program(Notation::Pglcij);
    c.bench_function("interpret_pglcij", |b| b.iter(|| black_box(&program).interpret(&env)));
}

fn bench_bisimilar(c: &mut Criterion) {
    let env = bench_env();
    let program = sample_program(Notation::Pglcij);
    let chain = program.behavior(&env);
    let oracle = program.interpret(&env);
    c.bench_function("bisimilar", |b| {
        b.iter(|| bisimilar(black_box(&chain), black_box(&oracle)))
    });
}

fn bench_extract_behavior(c: &mut Criterion) {
    let cf = normalize(&sample_pga_term());
    c.bench_function("extract_and_solve", |b| b.iter(|| extract_behavior(black_box(&cf))));
}

criterion_group!(
    benches,
    bench_normalize,
    bench_thread_extract,
    bench_extract_behavior,
    bench_behavior_chain,
    bench_interpret,
    bench_bisimilar
);
criterion_main!(benches);
