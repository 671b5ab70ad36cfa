//! Rayon against a single worker on the data-parallel estimators.
//!
//! Build with `--no-default-features` to time the sequential fallback; both
//! groups then run the same code.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dimlab_core::estimate::{box_dimension, pointwise_dimension_sampled, ScaleLadder};
use dimlab_core::product::verify_main_inequality;
use dimlab_core::shift::{sample_words, Alphabet, Factor, Markov, MeasureModel};
use dimlab_core::smooth::{iterate, SmoothMap, TorusAutParams};

fn hmm() -> MeasureModel {
    let rows = vec![vec![0.8, 0.15, 0.05], vec![0.2, 0.7, 0.1], vec![0.3, 0.3, 0.4]];
    let hidden = Markov::with_computed_stationary(rows).unwrap();
    Factor::new(Alphabet::new(2).unwrap(), hidden, 2, vec![0, 0, 1, 0, 0, 1, 1, 0, 0]).unwrap().into()
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("default", default), ("1 thread", single)]
}

fn bench(c: &mut Criterion) {
    let backend = if dimlab_core::par::is_parallel() { "rayon" } else { "sequential" };
    let model = hmm();
    let samples = sample_words(&model, 1, 1000, 40);
    let ladder = ScaleLadder::levels(5..41, 2.0).unwrap();
    let orbit = iterate(&SmoothMap::TorusAut(TorusAutParams::cat()), [0.1, 0.2], 200_000, 1).unwrap();
    let grid = ScaleLadder::geometric(2.0, 2..8).unwrap();

    let mut g = c.benchmark_group(format!("estimators/{backend}"));
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("pointwise_sampled", name), |b| {
            b.iter(|| pool.install(|| pointwise_dimension_sampled(&model, &samples, &ladder, 2.0).unwrap()))
        });
        g.bench_function(BenchmarkId::new("main_inequality", name), |b| {
            b.iter(|| pool.install(|| verify_main_inequality(&model, &samples, 0.2, 2.0, 4..=12, 4).unwrap()))
        });
        g.bench_function(BenchmarkId::new("box_dimension", name), |b| {
            b.iter(|| pool.install(|| box_dimension(&orbit, &grid).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
