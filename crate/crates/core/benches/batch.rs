use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qcf_core::analysis::Theorem;
use qcf_core::batch::{multi_start, region_sweep, solve_batch, Execution};
use qcf_core::solvers::Method;
use qcf_core::{lennard_jones, Centered, QcGeometry, SolverConfig, Strain};

fn loads(n: isize, count: usize) -> Vec<Centered<f64>> {
    (0..count)
        .map(|k| {
            let c = -2.0 + 4.0 * k as f64 / count as f64;
            Centered::from_fn(-n, n, |j| c * (1.0 - 0.1 * (j as f64 / n as f64).powi(2)))
        })
        .collect()
}

fn bench_solves(c: &mut Criterion) {
    let lj = lennard_jones();
    let g = QcGeometry::uniform(40, 8).unwrap();
    let phis = loads(40, 32);
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve_batch");
    for method in [Method::Newton, Method::GhostForceIteration] {
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(format!("{method:?}"), format!("{exec:?}")),
                &exec,
                |b, &exec| b.iter(|| solve_batch(&lj, &g, &phis, &cfg, method, exec)),
            );
        }
    }
    group.finish();
}

fn bench_multi_start(c: &mut Criterion) {
    let lj = lennard_jones();
    let g = QcGeometry::uniform(30, 6).unwrap();
    let phi = Centered::from_fn(-30, 30, |_| 1.5);
    let starts: Vec<Strain> = (0..32)
        .map(|k| {
            Strain::from_vec(
                (0..61)
                    .map(|i| 0.98 + 0.0015 * ((i * 7 + k * 3) % 40) as f64)
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("multi_start");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| b.iter(|| multi_start(&lj, &g, &phi, &starts, &cfg, exec)),
        );
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let r_uppers: Vec<f64> = (0..64).map(|k| 1.0 + 0.1 * k as f64 / 64.0).collect();
    let mut group = c.benchmark_group("region_sweep");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| b.iter(|| region_sweep(Theorem::Contraction, 0.5, &r_uppers, exec)),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_solves, bench_multi_start, bench_sweep);
criterion_main!(benches);
