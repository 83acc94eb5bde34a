mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use causeglue::classifier::classify;
use causeglue::contexts::{build_context_poset, make_partial_order, parties};
use causeglue::forcing::{check_monotone, forces, indeterminate_at, AtomKey, KripkeModel};
use causeglue::proposition::Proposition;
use common::kripke::{random_formula, random_model};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODELS: u64 = 600;

#[test]
fn forcing_is_monotone_and_double_negation_is_introduced() {
    let started = Instant::now();
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for seed in 0..MODELS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng);
        assert!(check_monotone(&m).is_empty(), "generator built a non-monotone model");
        let poset = m.poset();
        for _ in 0..8 {
            let depth = rng.random_range(0..=4);
            let phi = random_formula(&mut rng, depth);
            assert!(phi.depth() <= 4);
            let yes = m.forced_set(&phi).unwrap();
            let nn = m.forced_set(&Proposition::not(Proposition::not(phi.clone()))).unwrap();
            for c in 0..poset.len() {
                for d in poset.upset_indices(c) {
                    if yes[c] && !yes[d] {
                        violations.push(format!("seed {seed}: {phi} forced at {c} but not at {d}"));
                    }
                }
                if yes[c] && !nn[c] {
                    violations.push(format!("seed {seed}: {phi} forced at {c} without its double negation"));
                }
            }
            checked += 1;
        }
    }
    assert!(violations.is_empty(), "{} violations, first: {}", violations.len(), violations[0]);
    assert!(checked >= 500 * 8);
    assert!(started.elapsed().as_secs() < 5, "took {:?}", started.elapsed());
}

/// c0 below c1, with p forced only at c1.
fn excluded_middle_fixture() -> KripkeModel {
    let ps = parties(&["A", "B"]);
    let poset = build_context_poset(vec![
        ("c0".into(), make_partial_order(&ps, &BTreeSet::new()).unwrap()),
        ("c1".into(), make_partial_order(&ps, &BTreeSet::from([(0, 1)])).unwrap()),
    ])
    .unwrap();
    let mut m = causeglue::forcing::default_order_valuation(&poset);
    m.set_forced(AtomKey::Named("p".into()), BTreeSet::from([1]));
    m
}

#[test]
fn excluded_middle_fails_at_c0() {
    let m = excluded_middle_fixture();
    let p = Proposition::atom("p");
    let lem = Proposition::or(p.clone(), Proposition::not(p.clone()));
    assert!(!forces(&m, "c0", &lem).unwrap());
    assert!(forces(&m, "c1", &lem).unwrap());
    assert!(forces(&m, "c0", &Proposition::not(Proposition::not(lem))).unwrap());
    assert!(indeterminate_at(&m, "c0", &p).unwrap());
    // the same failure for a precedence atom: the empty order leaves A<B open
    let prec = Proposition::prec("A", "B");
    let lem = Proposition::or(prec.clone(), Proposition::not(prec));
    assert!(!forces(&m, "c0", &lem).unwrap());
}

fn model_and_family(seed: u64) -> (KripkeModel, Vec<String>, Vec<String>, Proposition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_model(&mut rng);
    let names: Vec<String> = m.poset().contexts().iter().map(|c| c.name.clone()).collect();
    let small: Vec<String> = names.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
    let small = if small.is_empty() { vec![names[0].clone()] } else { small };
    let depth = rng.random_range(0..=4);
    let phi = random_formula(&mut rng, depth);
    (m, small, names, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn classifier_is_nonempty_and_monotone_in_the_family(seed in any::<u64>()) {
        let (m, small, all, phi) = model_and_family(seed);
        let small: Vec<&str> = small.iter().map(String::as_str).collect();
        let all: Vec<&str> = all.iter().map(String::as_str).collect();
        let v_small = classify(&m, &small, &phi).unwrap();
        let v_all = classify(&m, &all, &phi).unwrap();
        prop_assert!(v_small.supported() || v_small.refuted() || v_small.indeterminate());
        prop_assert!(v_small.is_subset_of(&v_all));
    }

    #[test]
    fn refutation_is_support_of_the_negation(seed in any::<u64>()) {
        let (m, _, all, phi) = model_and_family(seed);
        let all: Vec<&str> = all.iter().map(String::as_str).collect();
        let v = classify(&m, &all, &phi).unwrap();
        let neg = classify(&m, &all, &Proposition::not(phi)).unwrap();
        prop_assert_eq!(v.refuted(), neg.supported());
    }
}

#[test]
fn discrete_deciding_posets_are_never_indeterminate() {
    // pairwise incomparable total orders, every atom posed everywhere
    let ps = parties(&["A", "B", "C"]);
    let orders = [[(0, 1), (1, 2)], [(1, 0), (0, 2)], [(2, 1), (1, 0)]];
    let poset = build_context_poset(
        orders
            .iter()
            .enumerate()
            .map(|(i, pairs)| (format!("t{i}"), make_partial_order(&ps, &pairs.iter().copied().collect()).unwrap()))
            .collect(),
    )
    .unwrap();
    let mut m = causeglue::forcing::default_order_valuation(&poset);
    m.set_forced(AtomKey::Named("p".into()), BTreeSet::from([0, 2]));
    let family = ["t0", "t1", "t2"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let depth = rng.random_range(0..=4);
        let phi = random_formula(&mut rng, depth);
        let phi = rename_atoms_to_p(phi);
        let v = classify(&m, &family, &phi).unwrap();
        assert!(!v.indeterminate(), "{phi} is indeterminate on a discrete deciding poset");
    }
}

fn rename_atoms_to_p(phi: Proposition) -> Proposition {
    match phi {
        Proposition::Atom(_) => Proposition::atom("p"),
        Proposition::And(l, r) => Proposition::and(rename_atoms_to_p(*l), rename_atoms_to_p(*r)),
        Proposition::Or(l, r) => Proposition::or(rename_atoms_to_p(*l), rename_atoms_to_p(*r)),
        Proposition::Implies(l, r) => Proposition::implies(rename_atoms_to_p(*l), rename_atoms_to_p(*r)),
        other => other,
    }
}
