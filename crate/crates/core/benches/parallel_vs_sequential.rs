use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use herzmorrey::{
    ball_indicator, luxemburg_norm, verify_theorem_3_1, Exec, ExponentFunction, Grid, HerzMorreyParams, OperatorHandle,
    SampledFunction, VerifyContext,
};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bump(grid: &std::sync::Arc<Grid>) -> SampledFunction {
    SampledFunction::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-r2).exp()
    })
    .unwrap()
}

fn operator_fields(c: &mut Criterion) {
    let cases = [
        (
            "maximal-1d-4096",
            Grid::new(1, 8.0, 4096).unwrap(),
            OperatorHandle::maximal(),
        ),
        (
            "maximal-2d-64",
            Grid::new(2, 8.0, 64).unwrap(),
            OperatorHandle::maximal(),
        ),
        (
            "ibeta-1d-4096",
            Grid::new(1, 8.0, 4096).unwrap(),
            OperatorHandle::fractional_integral(0.25),
        ),
        (
            "ibeta-2d-256",
            Grid::new(2, 8.0, 256).unwrap(),
            OperatorHandle::fractional_integral(0.25),
        ),
    ];
    let mut group = c.benchmark_group("operator-field");
    group.sample_size(10);
    for (label, grid, t) in &cases {
        let f = if t.name() == "maximal" {
            ball_indicator(grid, 0).unwrap()
        } else {
            bump(grid)
        };
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(*label, mode), &f, |b, f| {
                b.iter(|| black_box(t.apply_with(f, exec).unwrap()))
            });
        }
    }
    group.finish();
}

fn luxemburg(c: &mut Criterion) {
    let grid = Grid::new(2, 8.0, 512).unwrap();
    let q = ExponentFunction::new("decay".parse().unwrap(), 2, 8.0).unwrap();
    let f = bump(&grid);
    c.bench_function("luxemburg-2d-512", |b| {
        b.iter(|| black_box(luxemburg_norm(&f, &q).unwrap()))
    });
}

fn verify_run(c: &mut Criterion) {
    let grid = Grid::new(1, 8.0, 1024).unwrap();
    let q = ExponentFunction::constant(2.0, 1, 8.0).unwrap();
    let params = HerzMorreyParams::new(0.5, 0.5, 1.0, q, &grid).unwrap();
    let mut group = c.benchmark_group("theorem-sweep");
    group.sample_size(10);
    for (mode, exec) in MODES {
        let ctx = VerifyContext::new(grid.clone(), 42).with_exec(exec);
        group.bench_function(mode, |b| {
            b.iter(|| black_box(verify_theorem_3_1(&ctx, &OperatorHandle::maximal(), &params, 16).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, operator_fields, luxemburg, verify_run);
criterion_main!(benches);
