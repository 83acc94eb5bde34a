//! Random monotone Kripke models over order contexts, and random formulas.

#![allow(dead_code)]

use std::collections::BTreeSet;

use causeglue::contexts::{build_context_poset, make_partial_order, parties, Party};
use causeglue::forcing::{default_order_valuation, AtomKey, KripkeModel};
use causeglue::proposition::Proposition;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PARTIES: [&str; 3] = ["A", "B", "C"];
pub const ATOMS: [&str; 3] = ["p", "q", "r"];

fn random_order_pairs(rng: &mut ChaCha8Rng, n: usize) -> BTreeSet<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut pairs = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.45) {
                pairs.insert((perm[i], perm[j]));
            }
        }
    }
    pairs
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, p: f64) -> BTreeSet<usize> {
    (0..n).filter(|_| rng.random_bool(p)).collect()
}

/// Up to six contexts on three parties; named atoms with up-closed forced and
/// posed sets, and precedence atoms posed on random up-sets.
pub fn random_model(rng: &mut ChaCha8Rng) -> KripkeModel {
    let ps: Vec<Party> = parties(&PARTIES);
    let n = rng.random_range(1..=6);
    let contexts = (0..n)
        .map(|i| {
            let order = make_partial_order(&ps, &random_order_pairs(rng, ps.len())).unwrap();
            (format!("c{i}"), order)
        })
        .collect();
    let poset = build_context_poset(contexts).unwrap();
    let mut m = default_order_valuation(&poset);
    for a in ATOMS {
        let forced = poset.up_closure(&random_subset(rng, n, 0.3));
        let posed = poset.up_closure(&random_subset(rng, n, 0.6));
        m.set_forced(AtomKey::Named(a.into()), forced);
        if rng.random_bool(0.5) {
            m.set_posed(AtomKey::Named(a.into()), posed);
        }
    }
    for i in 0..PARTIES.len() {
        for j in 0..PARTIES.len() {
            if i != j && rng.random_bool(0.3) {
                m.set_posed(AtomKey::Prec(i, j), poset.up_closure(&random_subset(rng, n, 0.5)));
            }
        }
    }
    m
}

pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Proposition {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..5) {
            0 => Proposition::Bottom,
            1 | 2 => Proposition::atom(ATOMS[rng.random_range(0..ATOMS.len())]),
            _ => {
                let i = rng.random_range(0..PARTIES.len());
                let j = (i + rng.random_range(1..PARTIES.len())) % PARTIES.len();
                Proposition::prec(PARTIES[i], PARTIES[j])
            }
        };
    }
    let l = random_formula(rng, depth - 1);
    let r = random_formula(rng, depth - 1);
    match rng.random_range(0..4) {
        0 => Proposition::and(l, r),
        1 => Proposition::or(l, r),
        2 => Proposition::implies(l, r),
        _ => Proposition::not(l),
    }
}
