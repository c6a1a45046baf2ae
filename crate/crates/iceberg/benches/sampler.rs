use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use iceberg::experiments::{repeated_ec_program, sampler_for, source_for};
use iceberg::parallel::with_workers;

fn sampling(c: &mut Criterion) {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let shots = 1u64 << 16;
    let mut group = c.benchmark_group("repeated-ec");
    group.throughput(Throughput::Elements(shots));
    group.sample_size(10);
    for code in ["c1224", "c2026"] {
        let program = repeated_ec_program(&source_for(code, None).unwrap(), 10).unwrap();
        let mut sampler = sampler_for(&program).unwrap();
        sampler.noise.p = 2e-3;
        group.bench_with_input(BenchmarkId::new("sequential", code), &sampler, |b, s| {
            b.iter(|| with_workers(Some(1), || s.sample(shots, 7)))
        });
        group.bench_with_input(BenchmarkId::new(format!("parallel-{cores}"), code), &sampler, |b, s| {
            b.iter(|| with_workers(Some(cores), || s.sample(shots, 7)))
        });
    }
    group.finish();
}

criterion_group!(benches, sampling);
criterion_main!(benches);
