use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use groundkit::gen::random_digraph;
use groundkit::verify::{preservation_suite, SuiteConfig};
use groundkit::{Execution, MfvsSolver};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn oracle(c: &mut Criterion) {
    let g = random_digraph(&mut ChaCha8Rng::seed_from_u64(7), 18, 0.15);
    let mut group = c.benchmark_group("exact_mfvs_n18");
    group.sample_size(10);
    for (name, exec) in MODES {
        let solver = MfvsSolver::new().cap(18).first_only().execution(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| solver.solve(black_box(&g)).unwrap().size));
    }
    group.finish();
}

fn suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("preservation_suite_100x8");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SuiteConfig { instances: 100, max_n: 8, seed: 1, exec, ..SuiteConfig::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| preservation_suite(black_box(&cfg)).cases));
    }
    group.finish();
}

criterion_group!(benches, oracle, suite);
criterion_main!(benches);
