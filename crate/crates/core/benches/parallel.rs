use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conlaw::conserve::{ade_minimize_batch, CombinedSearch, RunConfig};
use conlaw::objective::{gradient_check_batch, shekel, styblinski_tang, LogSumExp, ShekelSpec};
use conlaw::Exec;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn points(dim: usize, n: usize, lo: f64, hi: f64, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| DVector::from_fn(dim, |_, _| rng.random_range(lo..hi))).collect()
}

fn combined(c: &mut Criterion) {
    let f = styblinski_tang(10).unwrap();
    let starts = points(10, 8, -5.0, 5.0, 1);
    let detect = RunConfig::new(0.01, 1, 1e-8).with_v0(DVector::zeros(10));
    let local = RunConfig::new(0.01, 50_000, 1e-8);
    let mut group = c.benchmark_group("combined_search");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let search = CombinedSearch::new(detect.clone(), 1000, local.clone()).with_exec(exec);
        group.bench_function(BenchmarkId::new(name, "styblinski-tang-10"), |b| {
            b.iter(|| search.run(black_box(&f), black_box(&starts)).unwrap())
        });
    }
    group.finish();
}

fn ade_batch(c: &mut Criterion) {
    let f = shekel(ShekelSpec::new(10).unwrap());
    let starts = points(4, 64, 0.0, 10.0, 2);
    let cfg = RunConfig::new(0.01, 20_000, 1e-8);
    let mut group = c.benchmark_group("ade_batch");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new(name, "shekel-10x64"), |b| {
            b.iter(|| ade_minimize_batch(black_box(&f), black_box(&starts), &cfg, exec))
        });
    }
    group.finish();
}

fn gradient_sweep(c: &mut Criterion) {
    let f = LogSumExp::random(50, 200, 5.0, 3).unwrap();
    let pts = points(50, 100, -2.0, 2.0, 4);
    let mut group = c.benchmark_group("gradient_check");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new(name, "lse-50x200"), |b| {
            b.iter(|| gradient_check_batch(black_box(&f), black_box(&pts), 1e-5, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, combined, ade_batch, gradient_sweep);
criterion_main!(benches);
