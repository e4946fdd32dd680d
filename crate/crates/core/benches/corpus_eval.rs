//! Sequential versus rayon-parallel corpus evaluation.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dualpath::batch::{
    evaluate_duality, evaluate_metrics, simulate, DualityInput, Execution, MetricInput,
    SimulationInput,
};
use dualpath::loss::Monotonicity;
use dualpath::metrics::OraclePositions;
use dualpath::path::ReadWritePath;
use dualpath::policy::synthetic_alpha;
use dualpath::transpose::transpose_g;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SENTENCES: usize = 2000;

fn random_path(rng: &mut impl Rng) -> ReadWritePath {
    let i = rng.gen_range(5..=60);
    let j = rng.gen_range(5..=60);
    let mut g: Vec<usize> = (0..i).map(|_| rng.gen_range(1..=j)).collect();
    g.sort_unstable();
    *g.last_mut().unwrap() = j;
    ReadWritePath::from_values(g, j).unwrap()
}

fn corpus() -> Vec<ReadWritePath> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..SENTENCES).map(|_| random_path(&mut rng)).collect()
}

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn bench_metrics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inputs: Vec<MetricInput> = corpus()
        .into_iter()
        .map(|path| {
            let a: Vec<usize> = (0..path.target_len())
                .map(|_| rng.gen_range(1..=path.source_len()))
                .collect();
            let alignment = Some(OraclePositions::aligned(&a, path.source_len()).unwrap());
            MetricInput { path, alignment }
        })
        .collect();
    let mut group = c.benchmark_group("metrics");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| evaluate_metrics(exec, black_box(&inputs)).unwrap())
        });
    }
    group.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let inputs: Vec<SimulationInput> = corpus()
        .iter()
        .map(|p| SimulationInput {
            target_len: p.target_len(),
            source_len: p.source_len(),
            alignment: None,
            replay: None,
        })
        .collect();
    let policy = dualpath::policy::PolicySpec::wait_k(3).unwrap();
    let mut group = c.benchmark_group("simulate_wait_k");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate(exec, policy, black_box(&inputs)).unwrap())
        });
    }
    group.finish();
}

fn bench_duality(c: &mut Criterion) {
    let inputs: Vec<DualityInput> = corpus()
        .into_iter()
        .map(|forward| {
            let backward = transpose_g(&forward).unwrap().backward_path();
            let af = synthetic_alpha(forward.g(), forward.source_len(), 0.7).unwrap();
            let ab = synthetic_alpha(backward.g(), backward.source_len(), 0.7).unwrap();
            DualityInput { forward, backward, matrices: Some((af, ab)) }
        })
        .collect();
    let mut group = c.benchmark_group("duality");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                evaluate_duality(exec, black_box(&inputs), 1.0, Monotonicity::Repair).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_metrics, bench_simulate, bench_duality);
criterion_main!(benches);
