use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use phatic_core::batch::{run_batch, run_batch_sequential};
use phatic_core::model::{build_ruleset, default_scenario};

fn batch(c: &mut Criterion) {
    let scenario = default_scenario();
    let program = build_ruleset();
    let initial = scenario.initial_state();
    let mut group = c.benchmark_group("batch");
    group.sample_size(10);
    for count in [64usize, 512] {
        group.throughput(Throughput::Elements(count as u64));
        group.bench_with_input(BenchmarkId::new("sequential", count), &count, |b, &n| {
            b.iter(|| run_batch_sequential("default", &initial, &program, black_box(0), n, 200))
        });
        // Without the `parallel` feature this is the sequential path again.
        group.bench_with_input(BenchmarkId::new("parallel", count), &count, |b, &n| {
            b.iter(|| run_batch("default", &initial, &program, black_box(0), n, 200))
        });
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
