use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use urnlab_core::product_formula::pi_n;
use urnlab_core::{build_model, exact_law_dp, sample_path, ColorPoint, ModelSpec, SparseLaw};

fn bench_exact_law(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_law_dp");
    group.sample_size(10);
    for (spec, n) in [(ModelSpec::Ssrw(1), 100_000u64), (ModelSpec::Ssrw(2), 10_000), (ModelSpec::Triangular, 10_000)] {
        let model = build_model(&spec).unwrap();
        let u0 = SparseLaw::delta(ColorPoint::origin(model.dim()));
        group.bench_with_input(BenchmarkId::new(model.name().to_string(), n), &n, |b, &n| {
            b.iter(|| exact_law_dp(&model, &u0, black_box(n), 1e-10).unwrap())
        });
    }
    group.finish();
}

fn bench_sample_path(c: &mut Criterion) {
    let model = build_model(&ModelSpec::Ssrw(2)).unwrap();
    let u0 = SparseLaw::delta(ColorPoint::origin(2));
    c.bench_function("sample_path/ssrw2/1e5", |b| b.iter(|| sample_path(&model, &u0, black_box(100_000), 7).unwrap()));
}

fn bench_pi_n(c: &mut Criterion) {
    c.bench_function("pi_n/real/1e6", |b| b.iter(|| pi_n(black_box(Complex64::new(0.5, 0.0)), 1_000_000)));
    c.bench_function("pi_n/complex/1e6", |b| b.iter(|| pi_n(black_box(Complex64::new(0.5, 0.3)), 1_000_000)));
}

criterion_group!(benches, bench_exact_law, bench_sample_path, bench_pi_n);
criterion_main!(benches);
