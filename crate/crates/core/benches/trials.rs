use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lmck::certify;
use lmck::exec::Execution;
use lmck::harness::{self, Coefficient};
use lmck::{reducing, ComplexSpec, PrimeModulus, Seed};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_sweep(c: &mut Criterion) {
    let spec = ComplexSpec::new(40, 2).unwrap();
    let coefs = [Coefficient::Prime(PrimeModulus::new(2).unwrap())];
    let mut group = c.benchmark_group("threshold_sweep n=40");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 64), &exec, |b, &exec| {
            b.iter(|| {
                harness::threshold_sweep_with(&spec, &[1.5, 2.0, 2.5], &coefs, 64, Seed::new(1), exec, false).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_mean_reducing(c: &mut Criterion) {
    let spec = ComplexSpec::new(20, 2).unwrap();
    let q = PrimeModulus::new(3).unwrap();
    let mut group = c.benchmark_group("mean_reducing_size n=20");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 64), &exec, |b, &exec| {
            b.iter(|| reducing::mean_reducing_size_with(&spec, black_box(150), &q, 64, Seed::new(2), exec).unwrap())
        });
    }
    group.finish();
}

fn bench_mtilde(c: &mut Criterion) {
    let spec = ComplexSpec::new(16, 2).unwrap();
    let q = PrimeModulus::new(2).unwrap();
    let mut group = c.benchmark_group("estimate_mtilde n=16");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 60), &exec, |b, &exec| {
            b.iter(|| reducing::estimate_mtilde_with(&spec, &q, 60, Seed::new(3), exec).unwrap())
        });
    }
    group.finish();
}

fn bench_certify(c: &mut Criterion) {
    let spec = ComplexSpec::new(25, 2).unwrap();
    let p = 3.0 * 25f64.ln() / 25.0;
    let mut group = c.benchmark_group("certify_trials n=25");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 32), &exec, |b, &exec| {
            b.iter(|| certify::certify_trials(&spec, p, 32, Seed::new(4), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_mean_reducing, bench_mtilde, bench_certify);
criterion_main!(benches);
