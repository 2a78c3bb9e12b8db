use std::hint::black_box;

use adiashort::engine::{sweep_parallel, sweep_serial};
use adiashort::protocols::{paired_sweep, Experiment};
use criterion::{criterion_group, criterion_main, Criterion};

fn experiments() -> Vec<Experiment> {
    paired_sweep().unwrap().into_iter().map(|e| e.with_step(1e-4).unwrap()).collect()
}

fn bench_sweep(c: &mut Criterion) {
    let exps = experiments();
    let mut group = c.benchmark_group("paired-sweep");
    group.sample_size(10);
    group.bench_function("serial", |b| b.iter(|| sweep_serial(black_box(&exps))));
    group.bench_function("parallel", |b| b.iter(|| sweep_parallel(black_box(&exps))));
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
