use std::hint::black_box;

use causeglue::contexts::{enumerate_total_orders, parties};
use causeglue::gluing::{causal_fraction, check_global_section, l1_distance_to_gluable, BehaviorTable, Scenario};
use causeglue::rational::{int, ratio};
use criterion::{criterion_group, criterion_main, Criterion};

fn guessing(s: &Scenario) -> BehaviorTable {
    BehaviorTable::from_fn(s.clone(), |x, a| if a[0] == x[1] && a[1] == x[0] { int(1) } else { int(0) }).unwrap()
}

fn noisy_guessing(s: &Scenario) -> BehaviorTable {
    guessing(s).mix(&ratio(2, 5), &BehaviorTable::uniform(s.clone())).unwrap()
}

/// A third party that copies the first party's setting, everyone else uniform.
fn three_party(s: &Scenario) -> BehaviorTable {
    BehaviorTable::from_fn(s.clone(), |x, a| if a[2] == x[0] { ratio(1, 4) } else { int(0) }).unwrap()
}

fn bench_gluing(c: &mut Criterion) {
    let s2 = Scenario::new(parties(&["A", "B"]), vec![2, 2], vec![2, 2]).unwrap();
    let o2 = enumerate_total_orders(s2.parties()).unwrap();
    let guess = guessing(&s2);
    let noisy = noisy_guessing(&s2);

    let mut g = c.benchmark_group("two_party_binary");
    g.bench_function("check_global_section/guessing", |b| {
        b.iter(|| check_global_section(black_box(&guess), &o2).unwrap())
    });
    g.bench_function("check_global_section/noisy", |b| {
        b.iter(|| check_global_section(black_box(&noisy), &o2).unwrap())
    });
    g.bench_function("causal_fraction/noisy", |b| b.iter(|| causal_fraction(black_box(&noisy), &o2).unwrap()));
    g.bench_function("l1_distance/noisy", |b| b.iter(|| l1_distance_to_gluable(black_box(&noisy), &o2).unwrap()));
    g.finish();

    let s3 = Scenario::new(parties(&["A", "B", "C"]), vec![2, 2, 2], vec![2, 2, 2]).unwrap();
    let o3 = enumerate_total_orders(s3.parties()).unwrap();
    let t3 = three_party(&s3);
    let mut g = c.benchmark_group("three_party_binary");
    g.sample_size(10);
    g.bench_function("check_global_section/copy", |b| b.iter(|| check_global_section(black_box(&t3), &o3).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_gluing);
criterion_main!(benches);
