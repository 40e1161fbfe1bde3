//! Sequential versus parallel seed fan-out on the Monte Carlo paths:
//! perfect-sampling batches and filtering-trace batches.
//!
//! The parallel variants go through `exec::map_seeds`, which uses rayon when
//! the `parallel` feature is on (the default). The sequential baselines call
//! the same per-seed closures through `exec::map_seeds_sequential`, so the
//! comparison isolates the fan-out itself.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use randmap::catalog;
use randmap::cftp;
use randmap::exec;
use randmap::filtering;

fn bench_cftp_batch(c: &mut Criterion) {
    let system = catalog::builtin("counterexample-truncated(6)")
        .unwrap()
        .system;
    let mut group = c.benchmark_group("cftp_batch");
    for &count in &[64usize, 256] {
        group.bench_with_input(
            BenchmarkId::new("sequential", count),
            &count,
            |b, &count| {
                b.iter(|| {
                    exec::map_seeds_sequential(0, count, |seed| {
                        cftp::cftp_sample(&system, seed).unwrap().sample
                    })
                })
            },
        );
        group.bench_with_input(BenchmarkId::new("parallel", count), &count, |b, &count| {
            b.iter(|| cftp::cftp_sample_many(&system, 0, count).unwrap())
        });
    }
    group.finish();
}

fn bench_trace_batch(c: &mut Criterion) {
    let system = catalog::builtin("non-h-example").unwrap().system;
    let mut group = c.benchmark_group("filtering_traces");
    for &reps in &[16usize, 64] {
        group.bench_with_input(BenchmarkId::new("sequential", reps), &reps, |b, &reps| {
            b.iter(|| {
                exec::map_seeds_sequential(0, reps, |seed| {
                    filtering::convergence_trace(&system, seed, 200)
                        .unwrap()
                        .steps
                        .len()
                })
            })
        });
        group.bench_with_input(BenchmarkId::new("parallel", reps), &reps, |b, &reps| {
            b.iter(|| filtering::convergence_traces(&system, 0, reps, 200).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_cftp_batch, bench_trace_batch);
criterion_main!(benches);
