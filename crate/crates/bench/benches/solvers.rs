use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdmsusy::numerics::incomplete_elliptic_e;
use pdmsusy::{
    discretize, second_order_nonconfluent, solve_spectrum, BoundaryCondition, LadderSystem, Seed,
    SusyOptions,
};
use pdmsusy_bench::{cosine_grid, cosine_system};

fn ladder(c: &mut Criterion) {
    let mut group = c.benchmark_group("ladder");
    for n in [1001, 4001] {
        let (profile, config, grid) = cosine_grid(n);
        group.bench_with_input(BenchmarkId::new("build", n), &n, |b, _| {
            b.iter(|| LadderSystem::build(&profile, &config, &grid).unwrap())
        });
        let sys = cosine_system(n);
        group.bench_with_input(BenchmarkId::new("nth_state_5", n), &n, |b, _| {
            b.iter(|| sys.nth_state(black_box(5)).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let sys = cosine_system(4001);
    let op = discretize(sys.profile(), sys.potential(), BoundaryCondition::dirichlet(), 1.0).unwrap();
    c.bench_function("solve_spectrum_6_levels_4001", |b| {
        b.iter(|| solve_spectrum(black_box(&op), 6).unwrap())
    });
}

fn susy(c: &mut Criterion) {
    let sys = cosine_system(4001);
    let u1 = Seed::from_state(&sys.nth_state(1).unwrap());
    let u2 = Seed::from_state(&sys.nth_state(2).unwrap());
    let opts = SusyOptions::default();
    c.bench_function("second_order_nonconfluent_4001", |b| {
        b.iter(|| second_order_nonconfluent(&sys, &u1, &u2, &opts).unwrap())
    });
}

fn elliptic(c: &mut Criterion) {
    c.bench_function("incomplete_elliptic_e", |b| {
        b.iter(|| incomplete_elliptic_e(black_box(7.3), black_box(0.93)).unwrap())
    });
}

criterion_group!(benches, ladder, oracle, susy, elliptic);
criterion_main!(benches);
