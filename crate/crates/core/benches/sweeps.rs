use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qmeas_core::batch::{
    bistochastic_rank_sweep, constrained_scheme_sweep, duality_sweep, equivalence_sweep, Execution,
};
use qmeas_core::Tolerances;

fn sweeps(c: &mut Criterion) {
    let tol = Tolerances::default();
    let modes = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

    let mut g = c.benchmark_group("equivalence");
    for (name, exec) in modes {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| black_box(equivalence_sweep(e, 0..48, &tol)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("bistochastic_rank");
    for (name, exec) in modes {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| black_box(bistochastic_rank_sweep(e, 0..48, &tol)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("constrained_schemes");
    g.sample_size(10);
    for (name, exec) in modes {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| black_box(constrained_scheme_sweep(e, 0..24, &tol)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("duality");
    for (name, exec) in modes {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| black_box(duality_sweep(e, 0..48, &tol)))
        });
    }
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
