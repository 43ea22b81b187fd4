use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use reebforge_bench::{fixtures, synthesized, PREC};
use reebforge_core::certificate::{certify, CertificateOptions};
use reebforge_core::sweep::brute_oracle_reeb;
use reebforge_core::{sweep_reeb, synthesize};

const NAMES: &[&str] = &["torus", "c222", "c32412", "h212_m5", "l1321"];

fn bench_synthesize(c: &mut Criterion) {
    let mut g = c.benchmark_group("synthesize");
    for (name, spec) in fixtures(NAMES) {
        g.bench_with_input(BenchmarkId::from_parameter(name), &spec, |b, s| b.iter(|| synthesize(black_box(s), PREC).unwrap()));
    }
    g.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    for (name, _, syn) in synthesized(NAMES) {
        g.bench_with_input(BenchmarkId::from_parameter(name), &syn.arrangement, |b, a| b.iter(|| sweep_reeb(black_box(a), PREC).unwrap()));
    }
    g.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle_512x128");
    g.sample_size(10);
    for (name, _, syn) in synthesized(NAMES) {
        g.bench_with_input(BenchmarkId::from_parameter(name), &syn.arrangement, |b, a| {
            b.iter(|| brute_oracle_reeb(black_box(a), 512, 128).unwrap())
        });
    }
    g.finish();
}

fn bench_certify(c: &mut Criterion) {
    let mut g = c.benchmark_group("certify");
    g.sample_size(10);
    let opts =
        CertificateOptions { region_points: 10_000, staged_points: 1_000, regularity_points: 200, oracle: None, ..Default::default() };
    for (name, spec, syn) in synthesized(&["c222", "h212_m5"]) {
        g.bench_function(name, |b| b.iter(|| certify(black_box(&spec), black_box(&syn), &opts)));
    }
    g.finish();
}

criterion_group!(benches, bench_synthesize, bench_sweep, bench_oracle, bench_certify);
criterion_main!(benches);
