//! Independent reference for two-party binary gluing.
//!
//! Deterministic strategies are listed by hand (no use of the library's
//! strategy enumerator or signalling rows) and gluability is decided as
//! membership in their convex hull, a vertex-form LP.

#![allow(dead_code)]

use causeglue::contexts::parties;
use causeglue::gluing::{BehaviorTable, Scenario};
use causeglue::lp::{LinearProgram, Relation, Sense};
use causeglue::rational::{int, ratio, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn binary2() -> Scenario {
    Scenario::new(parties(&["A", "B"]), vec![2, 2], vec![2, 2]).unwrap()
}

/// Entry index for p(a b | x y) in the 16-vector, row-major over (x, y) then (a, b).
pub fn idx(x: usize, y: usize, a: usize, b: usize) -> usize {
    ((x * 2 + y) * 2 + a) * 2 + b
}

/// 64 strategies with A first (a = f(x), b = g(x, y)) and 64 with B first.
pub fn vertices() -> Vec<Vec<Rational>> {
    let mut out = Vec::with_capacity(128);
    for first_is_a in [true, false] {
        for f in 0..4usize {
            for g in 0..16usize {
                let mut v = vec![int(0); 16];
                for x in 0..2 {
                    for y in 0..2 {
                        let (a, b) = if first_is_a {
                            let a = (f >> x) & 1;
                            (a, (g >> (x * 2 + y)) & 1)
                        } else {
                            let b = (f >> y) & 1;
                            ((g >> (y * 2 + x)) & 1, b)
                        };
                        v[idx(x, y, a, b)] = int(1);
                    }
                }
                out.push(v);
            }
        }
    }
    out
}

pub fn table(p: Vec<Rational>) -> BehaviorTable {
    let s = binary2();
    // the library's entry layout must agree with `idx`
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let e = s.entry(s.setting_index(&[x, y]), s.outcome_index(&[a, b]));
                    assert_eq!(e, idx(x, y, a, b));
                }
            }
        }
    }
    BehaviorTable::new(s, p).unwrap()
}

/// Convex weights over `vertices()` reproducing p, if any.
pub fn hull_weights(p: &[Rational], verts: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let mut lp = LinearProgram::new(verts.len(), Sense::Minimize);
    for e in 0..p.len() {
        let terms = verts
            .iter()
            .enumerate()
            .filter(|(_, v)| v[e] != int(0))
            .map(|(k, v)| (k, v[e].clone()))
            .collect();
        lp.add_constraint(terms, Relation::Eq, p[e].clone());
    }
    lp.add_constraint((0..verts.len()).map(|k| (k, int(1))).collect(), Relation::Eq, int(1));
    lp.solve().optimal().map(|s| s.values)
}

pub fn dot(w: &[Rational], v: &[Rational]) -> Rational {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn max_over_vertices(w: &[Rational], verts: &[Vec<Rational>]) -> Rational {
    verts.iter().map(|v| dot(w, v)).max().unwrap()
}

pub fn guessing() -> Vec<Rational> {
    let mut p = vec![int(0); 16];
    for x in 0..2 {
        for y in 0..2 {
            p[idx(x, y, y, x)] = int(1);
        }
    }
    p
}

pub fn uniform() -> Vec<Rational> {
    vec![ratio(1, 4); 16]
}

fn mix(a: &[Rational], b: &[Rational], t: &Rational) -> Vec<Rational> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * (int(1) - t) + y * t)
        .collect()
}

fn random_row_table(rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let mut p = vec![int(0); 16];
    for row in 0..4 {
        let w: Vec<i64> = (0..4).map(|_| rng.random_range(0..6)).collect();
        let total: i64 = w.iter().sum();
        for (k, wk) in w.iter().enumerate() {
            p[row * 4 + k] = if total == 0 {
                ratio(1, 4)
            } else {
                ratio(*wk, total)
            };
        }
    }
    p
}

fn random_separable(rng: &mut ChaCha8Rng, verts: &[Vec<Rational>]) -> Vec<Rational> {
    let k = rng.random_range(1..=4);
    let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..5)).collect();
    let total: i64 = weights.iter().sum();
    let mut p = vec![int(0); 16];
    for w in weights {
        let v = &verts[rng.random_range(0..verts.len())];
        for (pe, ve) in p.iter_mut().zip(v) {
            *pe += ve * ratio(w, total);
        }
    }
    p
}

/// Separable constructions, their perturbations toward guessing or random
/// tables, and plain random tables, in a fixed proportion.
pub fn random_behaviour(rng: &mut ChaCha8Rng, verts: &[Vec<Rational>]) -> Vec<Rational> {
    match rng.random_range(0..5) {
        0 | 1 => random_separable(rng, verts),
        2 => {
            let t = ratio(rng.random_range(1..10), 10);
            mix(&random_separable(rng, verts), &guessing(), &t)
        }
        3 => {
            let t = ratio(rng.random_range(1..6), 10);
            mix(&random_separable(rng, verts), &random_row_table(rng), &t)
        }
        _ => random_row_table(rng),
    }
}

/// max Σλ subject to Σ λ_k v_k <= p entrywise.
pub fn oracle_causal_fraction(p: &[Rational], verts: &[Vec<Rational>]) -> Rational {
    let mut lp = LinearProgram::new(verts.len(), Sense::Maximize);
    for k in 0..verts.len() {
        lp.set_objective(k, int(1));
    }
    for e in 0..p.len() {
        let terms = verts
            .iter()
            .enumerate()
            .filter(|(_, v)| v[e] != int(0))
            .map(|(k, v)| (k, v[e].clone()))
            .collect();
        lp.add_constraint(terms, Relation::Le, p[e].clone());
    }
    lp.solve().optimal().unwrap().objective
}

/// min Σ|p − Σ λ_k v_k| over convex weights λ.
pub fn oracle_l1(p: &[Rational], verts: &[Vec<Rational>]) -> Rational {
    let n = verts.len();
    let mut lp = LinearProgram::new(n + p.len(), Sense::Minimize);
    for e in 0..p.len() {
        lp.set_objective(n + e, int(1));
        let hull: Vec<(usize, Rational)> = verts
            .iter()
            .enumerate()
            .filter(|(_, v)| v[e] != int(0))
            .map(|(k, v)| (k, v[e].clone()))
            .collect();
        // s_e >= p_e - q_e and s_e >= q_e - p_e
        let mut up = hull.clone();
        up.push((n + e, int(1)));
        lp.add_constraint(up, Relation::Ge, p[e].clone());
        let mut down: Vec<(usize, Rational)> = hull.into_iter().map(|(k, c)| (k, -c)).collect();
        down.push((n + e, int(1)));
        lp.add_constraint(down, Relation::Ge, -p[e].clone());
    }
    lp.add_constraint((0..n).map(|k| (k, int(1))).collect(), Relation::Eq, int(1));
    lp.solve().optimal().unwrap().objective
}
