use std::hint::black_box;

use causeglue::rational::ratio;
use causeglue::spindyn::{
    build_state_space, evolve_density, order_statistics, stationary_density, EventPredicate, Helicity, MoveCatalogue,
    MoveKind, Primitive, SpinNetworkConfig,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn catalogue() -> MoveCatalogue {
    MoveCatalogue {
        kinds: vec![MoveKind::SpinStep, MoveKind::HelicityFlip],
        beta: 0.2,
        gamma: ratio(2, 1),
        spin_window: (0, 6),
        ..MoveCatalogue::default()
    }
}

fn bench_dynamics(c: &mut Criterion) {
    let seed = SpinNetworkConfig::theta([2, 2, 2], [Helicity::Minus; 3]);
    let moves = catalogue();
    c.bench_function("build_state_space/theta", |b| {
        b.iter(|| build_state_space(black_box(&seed), &moves, 10_000).unwrap())
    });

    let gen = build_state_space(&seed, &moves, 10_000).unwrap();
    let start = gen.index_of(&seed).unwrap();
    c.bench_function("stationary_density/theta", |b| b.iter(|| stationary_density(black_box(&gen)).unwrap()));

    let mut rho0 = vec![0.0; gen.len()];
    rho0[start] = 1.0;
    c.bench_function("evolve_density/theta_tau_5", |b| b.iter(|| evolve_density(black_box(&rho0), 5.0, &gen).unwrap()));

    let a = EventPredicate::new("A", vec![Primitive::Helicity { edge: 0, value: Helicity::Plus }], None);
    let b_event = EventPredicate::new("B", vec![Primitive::Spin { edge: 1, lo: 4, hi: 6 }], None);
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(20);
    g.bench_function("order_statistics/1000_runs", |b| {
        b.iter(|| order_statistics(&gen, start, &a, &b_event, 1000, 20.0, black_box(3)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_dynamics);
criterion_main!(benches);
