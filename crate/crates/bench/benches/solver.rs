use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use shocklab_bench::step_fixture;

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("rusanov_step");
    for n in [64, 128, 256] {
        let fx = step_fixture(n);
        group.throughput(Throughput::Elements(fx.field.grid().len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{}", 2 * n)), &fx, |b, fx| {
            b.iter(|| fx.solver.step(&fx.field, 0.0, &fx.boundary).expect("step"))
        });
    }
    group.finish();
}

criterion_group!(benches, step);
criterion_main!(benches);
