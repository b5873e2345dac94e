use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use steerkit::quadrature::load_lebedev;
use steerkit::{coarse_grain, coarse_grain_exact, simulate_four, simulate_three, solve_feasible, Backend, Pairing};
use steerkit_bench::{povms, random_system, separation_system};

fn coarse_graining(c: &mut Criterion) {
    let mut group = c.benchmark_group("coarse_grain");
    let dirs: Vec<_> = povms(4, 1)[0].directions();
    for order in [59, 131] {
        let grid = load_lebedev(order).unwrap();
        group.bench_with_input(BenchmarkId::new("lebedev", order), &grid, |b, g| {
            b.iter(|| coarse_grain(black_box(&dirs), g).unwrap())
        });
    }
    group.bench_function("exact", |b| b.iter(|| coarse_grain_exact(black_box(&dirs)).unwrap()));
    group.finish();
}

fn simulations(c: &mut Criterion) {
    let three = povms(3, 1).remove(0);
    let four = povms(4, 1).remove(0);
    let grid = Backend::Quadrature(load_lebedev(131).unwrap());
    c.bench_function("simulate_three", |b| b.iter(|| simulate_three(black_box(&three)).unwrap()));
    c.bench_function("simulate_four/lebedev_131", |b| {
        b.iter(|| simulate_four(black_box(&four), &grid, Pairing::P12).unwrap())
    });
    c.bench_function("simulate_four/exact", |b| {
        b.iter(|| simulate_four(black_box(&four), &Backend::ExactPolygon, Pairing::P12).unwrap())
    });
}

fn linear_programs(c: &mut Criterion) {
    let infeasible = separation_system(0.33);
    let feasible = separation_system(0.30);
    let random = random_system(0);
    c.bench_function("lp/certificate", |b| b.iter(|| solve_feasible(black_box(&infeasible))));
    c.bench_function("lp/feasible", |b| b.iter(|| solve_feasible(black_box(&feasible))));
    c.bench_function("lp/random", |b| b.iter(|| solve_feasible(black_box(&random))));
}

criterion_group!(benches, coarse_graining, simulations, linear_programs);
criterion_main!(benches);
