//! Global-section test for behaviour tables.
//!
//! A behaviour glues when it is a convex mixture of tables, each admissible
//! for one total order. All programs are written over unnormalised cone
//! variables `u_σ >= 0` (one block per order) that satisfy the order's
//! signalling rows and have equal mass across settings tuples; the mixture
//! weight of an order is the mass of its block.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::behavior::{BehaviorTable, Scenario};
use super::constraints::{check_orders_match, mass_constraints, order_constraints};
use super::GlueError;
use crate::contexts::CausalOrder;
use crate::lp::{LinearProgram, LpOutcome, Relation, Sense};
use crate::rational::{fmt_exact, Rational};

/// Upper bound on dense tableau size (rows times columns).
pub const MAX_LP_CELLS: usize = 8_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateComponent {
    pub order: CausalOrder,
    pub weight: Rational,
    pub table: BehaviorTable,
}

/// Linear functional with `Σ w·q <= bound` on every gluable `q` and
/// `Σ w·p = value > bound` on the tested behaviour.
///
/// Coefficients and bound are integers with gcd 1; coefficients are
/// nonnegative and vanish somewhere in every settings row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub scenario: Scenario,
    pub coefficients: Vec<BigInt>,
    pub bound: BigInt,
    pub value: Rational,
}

impl Witness {
    pub fn evaluate(&self, q: &BehaviorTable) -> Rational {
        self.coefficients
            .iter()
            .zip(q.probabilities())
            .filter(|(w, _)| !w.is_zero())
            .map(|(w, p)| p * Rational::from_integer(w.clone()))
            .sum()
    }

    pub fn bound_rational(&self) -> Rational {
        Rational::from_integer(self.bound.clone())
    }

    /// `(settings, outcomes, coefficient)` for nonzero coefficients.
    pub fn terms(&self) -> Vec<(Vec<usize>, Vec<usize>, BigInt)> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(e, w)| {
                let (x, a) = self.scenario.split_entry(e);
                (self.scenario.setting_tuple(x), self.scenario.outcome_tuple(a), w.clone())
            })
            .collect()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
        let terms: Vec<String> = self
            .terms()
            .iter()
            .map(|(x, a, w)| {
                let coeff = if w.is_one() { String::new() } else { format!("{w}*") };
                format!("{coeff}p({}|{})", join(a), join(x))
            })
            .collect();
        write!(f, "{} <= {}", terms.join(" + "), self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlueVerdict {
    pub gluable: bool,
    /// Mixture components with positive weight; present iff gluable.
    pub certificate: Option<Vec<CertificateComponent>>,
    /// Present iff not gluable.
    pub witness: Option<Witness>,
    pub causal_fraction: Rational,
    pub l1_distance: Rational,
}

fn validate_orders(scenario: &Scenario, orders: &[CausalOrder]) -> Result<(), GlueError> {
    if orders.is_empty() {
        return Err(GlueError::NoOrders);
    }
    for o in orders {
        check_orders_match(scenario, o)?;
    }
    Ok(())
}

fn ensure_size(vars: usize, rows: usize) -> Result<(), GlueError> {
    // slacks and artificials at most double the width
    let cells = rows.saturating_mul(vars.saturating_add(2 * rows));
    if cells > MAX_LP_CELLS {
        return Err(GlueError::Size(format!(
            "linear program with {vars} variables and {rows} rows exceeds the size cap"
        )));
    }
    Ok(())
}

fn qi(c: i64) -> Rational {
    Rational::from_integer(c.into())
}

/// LP whose first `orders.len() * E` variables are the cone blocks, already
/// constrained by signalling and mass rows. Returns block offsets.
fn cone_program(
    scenario: &Scenario,
    orders: &[CausalOrder],
    extra_vars: usize,
    extra_rows: usize,
    sense: Sense,
) -> Result<(LinearProgram, Vec<usize>), GlueError> {
    let e = scenario.entries();
    let signalling: Vec<_> = orders
        .iter()
        .map(|o| order_constraints(scenario, o))
        .collect::<Result<_, _>>()?;
    let mass = mass_constraints(scenario);
    let rows: usize = signalling.iter().map(|s| s.len() + mass.len()).sum::<usize>() + extra_rows;
    let vars = orders.len() * e + extra_vars;
    ensure_size(vars, rows)?;

    let mut lp = LinearProgram::new(vars, sense);
    let offsets: Vec<usize> = (0..orders.len()).map(|k| k * e).collect();
    for (rows, &off) in signalling.iter().zip(&offsets) {
        for row in rows {
            lp.add_constraint(
                row.terms.iter().map(|&(j, c)| (off + j, qi(c))).collect(),
                Relation::Eq,
                Rational::zero(),
            );
        }
        for row in &mass {
            lp.add_constraint(
                row.iter().map(|&(j, c)| (off + j, qi(c))).collect(),
                Relation::Eq,
                Rational::zero(),
            );
        }
    }
    Ok((lp, offsets))
}

fn block_sum(offsets: &[usize], entry: usize) -> Vec<(usize, Rational)> {
    offsets.iter().map(|&off| (off + entry, Rational::one())).collect()
}

/// Decides gluability over the given total orders.
pub fn check_global_section(p: &BehaviorTable, orders: &[CausalOrder]) -> Result<GlueVerdict, GlueError> {
    let scenario = p.scenario();
    validate_orders(scenario, orders)?;
    let e = scenario.entries();
    let (mut lp, offsets) = cone_program(scenario, orders, 0, e, Sense::Minimize)?;
    for (j, pj) in p.probabilities().iter().enumerate() {
        lp.add_constraint(block_sum(&offsets, j), Relation::Eq, pj.clone());
    }
    match lp.solve() {
        LpOutcome::Optimal(sol) => {
            let no = scenario.outcome_tuples();
            let mut certificate = Vec::new();
            for (order, &off) in orders.iter().zip(&offsets) {
                let block = &sol.values[off..off + e];
                let weight: Rational = block[..no].iter().sum();
                if weight.is_zero() {
                    continue;
                }
                let q = block.iter().map(|u| u / &weight).collect();
                certificate.push(CertificateComponent {
                    order: order.clone(),
                    weight,
                    table: BehaviorTable::new(scenario.clone(), q)?,
                });
            }
            Ok(GlueVerdict {
                gluable: true,
                certificate: Some(certificate),
                witness: None,
                causal_fraction: Rational::one(),
                l1_distance: Rational::zero(),
            })
        }
        LpOutcome::Infeasible => Ok(GlueVerdict {
            gluable: false,
            certificate: None,
            witness: Some(separating_witness(p, orders)?),
            causal_fraction: causal_fraction(p, orders)?,
            l1_distance: l1_distance_to_gluable(p, orders)?,
        }),
        LpOutcome::Unbounded => Err(GlueError::Solver("feasibility program reported unbounded".into())),
    }
}

/// Largest `λ` with `p = λ·s + (1-λ)·r`, `s` gluable and `r` any table.
pub fn causal_fraction(p: &BehaviorTable, orders: &[CausalOrder]) -> Result<Rational, GlueError> {
    let scenario = p.scenario();
    validate_orders(scenario, orders)?;
    let (mut lp, offsets) = cone_program(scenario, orders, 0, scenario.entries(), Sense::Maximize)?;
    for (j, pj) in p.probabilities().iter().enumerate() {
        lp.add_constraint(block_sum(&offsets, j), Relation::Le, pj.clone());
    }
    for &off in &offsets {
        for a in 0..scenario.outcome_tuples() {
            lp.set_objective(off + scenario.entry(0, a), Rational::one());
        }
    }
    lp.solve()
        .optimal()
        .map(|s| s.objective)
        .ok_or_else(|| GlueError::Solver("causal fraction program not optimal".into()))
}

/// `min Σ_x Σ_a |p - q|` over gluable `q`, every settings tuple weighted 1.
pub fn l1_distance_to_gluable(p: &BehaviorTable, orders: &[CausalOrder]) -> Result<Rational, GlueError> {
    let scenario = p.scenario();
    validate_orders(scenario, orders)?;
    let e = scenario.entries();
    let (mut lp, offsets) = cone_program(scenario, orders, e, 2 * e + 1, Sense::Minimize)?;
    let slack0 = orders.len() * e;
    for (j, pj) in p.probabilities().iter().enumerate() {
        let s = slack0 + j;
        lp.set_objective(s, Rational::one());
        let mut up = block_sum(&offsets, j);
        up.push((s, Rational::one()));
        lp.add_constraint(up, Relation::Ge, pj.clone());
        let mut down: Vec<_> = offsets.iter().map(|&off| (off + j, -Rational::one())).collect();
        down.push((s, Rational::one()));
        lp.add_constraint(down, Relation::Ge, -pj.clone());
    }
    let total: Vec<_> = offsets
        .iter()
        .flat_map(|&off| (0..scenario.outcome_tuples()).map(move |a| (off + a, Rational::one())))
        .collect();
    lp.add_constraint(total, Relation::Eq, Rational::one());
    lp.solve()
        .optimal()
        .map(|s| s.objective)
        .ok_or_else(|| GlueError::Solver("distance program not optimal".into()))
}

/// `max Σ w·q` over tables admissible for one total order.
pub fn max_over_order(w: &[Rational], scenario: &Scenario, order: &CausalOrder) -> Result<Rational, GlueError> {
    let e = scenario.entries();
    let rows = order_constraints(scenario, order)?;
    ensure_size(e, rows.len() + scenario.setting_tuples())?;
    let mut lp = LinearProgram::new(e, Sense::Maximize);
    for (j, wj) in w.iter().enumerate() {
        lp.set_objective(j, wj.clone());
    }
    for row in rows {
        lp.add_constraint(
            row.terms.iter().map(|&(j, c)| (j, qi(c))).collect(),
            Relation::Eq,
            Rational::zero(),
        );
    }
    let no = scenario.outcome_tuples();
    for x in 0..scenario.setting_tuples() {
        lp.add_constraint(
            (0..no).map(|a| (scenario.entry(x, a), Rational::one())).collect(),
            Relation::Eq,
            Rational::one(),
        );
    }
    lp.solve()
        .optimal()
        .map(|s| s.objective)
        .ok_or_else(|| GlueError::Solver("bound program not optimal".into()))
}

/// Tight bound of `w` over all gluable tables.
pub fn gluable_bound(w: &[Rational], scenario: &Scenario, orders: &[CausalOrder]) -> Result<Rational, GlueError> {
    validate_orders(scenario, orders)?;
    let mut best: Option<Rational> = None;
    for o in orders {
        let v = max_over_order(w, scenario, o)?;
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    Ok(best.expect("orders nonempty"))
}

/// Maximises `Σ w·p - β` over `w ∈ [0,1]^E` with `β` bounding `w` on every
/// order's polytope (through the dual of the inner maximisation), then
/// canonicalises and recomputes the tight bound.
pub fn separating_witness(p: &BehaviorTable, orders: &[CausalOrder]) -> Result<Witness, GlueError> {
    let scenario = p.scenario();
    validate_orders(scenario, orders)?;
    let e = scenario.entries();
    let nx = scenario.setting_tuples();
    let no = scenario.outcome_tuples();
    let signalling: Vec<_> = orders
        .iter()
        .map(|o| order_constraints(scenario, o))
        .collect::<Result<_, _>>()?;

    // layout: w[E], beta, then per order z+[X] z-[X] t+[R] t-[R]
    let beta = e;
    let mut next = e + 1;
    let mut blocks = Vec::new();
    for rows in &signalling {
        let z = next;
        let t = z + 2 * nx;
        next = t + 2 * rows.len();
        blocks.push((z, t));
    }
    let rows_total = e + orders.len() * (e + 1);
    ensure_size(next, rows_total)?;

    let mut lp = LinearProgram::new(next, Sense::Maximize);
    for (j, pj) in p.probabilities().iter().enumerate() {
        lp.set_objective(j, pj.clone());
        lp.add_constraint(vec![(j, Rational::one())], Relation::Le, Rational::one());
    }
    lp.set_objective(beta, -Rational::one());

    for (rows, &(z, t)) in signalling.iter().zip(&blocks) {
        // transpose of the signalling rows, by entry
        let mut by_entry: Vec<Vec<(usize, i64)>> = vec![Vec::new(); e];
        for (r, row) in rows.iter().enumerate() {
            for &(j, c) in &row.terms {
                by_entry[j].push((r, c));
            }
        }
        for (j, col) in by_entry.iter().enumerate() {
            let x = j / no;
            let mut terms = vec![
                (z + x, Rational::one()),
                (z + nx + x, -Rational::one()),
                (j, -Rational::one()),
            ];
            for &(r, c) in col {
                terms.push((t + r, qi(c)));
                terms.push((t + rows.len() + r, qi(-c)));
            }
            lp.add_constraint(terms, Relation::Ge, Rational::zero());
        }
        let mut cap: Vec<_> = (0..nx)
            .flat_map(|x| [(z + x, Rational::one()), (z + nx + x, -Rational::one())])
            .collect();
        cap.push((beta, -Rational::one()));
        lp.add_constraint(cap, Relation::Le, Rational::zero());
    }

    let sol = lp
        .solve()
        .optimal()
        .ok_or_else(|| GlueError::Solver("witness program not optimal".into()))?;
    if !sol.objective.is_positive() {
        return Err(GlueError::Solver("no separating functional: behaviour is gluable".into()));
    }

    // shift each settings row so its smallest coefficient is zero
    let mut w: Vec<Rational> = sol.values[..e].to_vec();
    for x in 0..nx {
        let row = &mut w[x * no..(x + 1) * no];
        let min = row.iter().min().cloned().unwrap_or_else(Rational::zero);
        for v in row.iter_mut() {
            *v -= &min;
        }
    }
    let bound = gluable_bound(&w, scenario, orders)?;

    let denom_lcm = w
        .iter()
        .chain(std::iter::once(&bound))
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let scaled: Vec<BigInt> = w
        .iter()
        .map(|q| (q * Rational::from_integer(denom_lcm.clone())).to_integer())
        .collect();
    let scaled_bound = (&bound * Rational::from_integer(denom_lcm)).to_integer();
    let g = scaled
        .iter()
        .chain(std::iter::once(&scaled_bound))
        .fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let g = if g.is_zero() { BigInt::one() } else { g };
    let coefficients: Vec<BigInt> = scaled.into_iter().map(|v| v / &g).collect();
    let witness_bound = scaled_bound / &g;

    let mut witness = Witness {
        scenario: scenario.clone(),
        coefficients,
        bound: witness_bound,
        value: Rational::zero(),
    };
    witness.value = witness.evaluate(p);
    if witness.value <= witness.bound_rational() {
        return Err(GlueError::Solver("canonical witness lost its violation".into()));
    }
    Ok(witness)
}

impl fmt::Display for GlueVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.gluable { "GLUABLE" } else { "NOT GLUABLE" })?;
        writeln!(f, "causal fraction: {}", fmt_exact(&self.causal_fraction))?;
        write!(f, "l1 distance: {}", fmt_exact(&self.l1_distance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{enumerate_total_orders, parties};
    use crate::gluing::{enumerate_deterministic_strategies, is_compatible_with_order};
    use crate::rational::{int, ratio};

    fn binary2() -> (Scenario, Vec<CausalOrder>) {
        let s = Scenario::new(parties(&["A", "B"]), vec![2, 2], vec![2, 2]).unwrap();
        let o = enumerate_total_orders(s.parties()).unwrap();
        (s, o)
    }

    fn guessing(s: &Scenario) -> BehaviorTable {
        BehaviorTable::deterministic(s.clone(), |x| vec![x[1], x[0]]).unwrap()
    }

    #[test]
    fn deterministic_one_way_strategy_glues_on_its_order() {
        let (s, orders) = binary2();
        let p = BehaviorTable::deterministic(s, |x| vec![x[0], x[0] ^ x[1]]).unwrap();
        let v = check_global_section(&p, &orders).unwrap();
        assert!(v.gluable);
        let cert = v.certificate.unwrap();
        assert_eq!(cert.len(), 1);
        assert_eq!(cert[0].order, orders[0]);
        assert_eq!(cert[0].weight, int(1));
        assert!(v.witness.is_none());
    }

    #[test]
    fn even_mixture_of_opposite_orders_glues() {
        let (s, orders) = binary2();
        let ab = BehaviorTable::deterministic(s.clone(), |x| vec![0, x[0]]).unwrap();
        let ba = BehaviorTable::deterministic(s, |x| vec![x[1], 0]).unwrap();
        let p = ab.mix(&ratio(1, 2), &ba).unwrap();
        let v = check_global_section(&p, &orders).unwrap();
        assert!(v.gluable);
        let cert = v.certificate.unwrap();
        let weights: Rational = cert.iter().map(|c| c.weight.clone()).sum();
        assert_eq!(weights, int(1));
        let mut rebuilt = vec![Rational::zero(); s_entries(&p)];
        for c in &cert {
            assert!(is_compatible_with_order(&c.table, &c.order).unwrap());
            for (r, q) in rebuilt.iter_mut().zip(c.table.probabilities()) {
                *r += &c.weight * q;
            }
        }
        assert_eq!(rebuilt, p.probabilities());
    }

    fn s_entries(p: &BehaviorTable) -> usize {
        p.scenario().entries()
    }

    #[test]
    fn guessing_game_is_not_gluable() {
        let (s, orders) = binary2();
        let p = guessing(&s);
        let v = check_global_section(&p, &orders).unwrap();
        assert!(!v.gluable);
        assert!(v.certificate.is_none());
        let w = v.witness.unwrap();
        let mut best = Rational::zero();
        for o in &orders {
            for q in enumerate_deterministic_strategies(&s, o).unwrap() {
                let val = w.evaluate(&q);
                assert!(val <= w.bound_rational());
                best = best.max(val);
            }
        }
        assert_eq!(best, w.bound_rational());
        assert!(w.value > w.bound_rational());
        assert_eq!(v.causal_fraction, int(0));
        assert_eq!(v.l1_distance, int(4));
    }

    #[test]
    fn guessing_witness_is_the_guessing_game() {
        let (s, orders) = binary2();
        let w = separating_witness(&guessing(&s), &orders).unwrap();
        for e in 0..s.entries() {
            let (x, a) = s.split_entry(e);
            let (x, a) = (s.setting_tuple(x), s.outcome_tuple(a));
            let hit = a[0] == x[1] && a[1] == x[0];
            assert_eq!(w.coefficients[e], BigInt::from(hit as u8));
        }
        assert_eq!(w.bound, BigInt::from(2));
        assert_eq!(w.value, int(4));
        assert_eq!(w.to_string(), "p(0 0|0 0) + p(1 0|0 1) + p(0 1|1 0) + p(1 1|1 1) <= 2");
    }

    #[test]
    fn gluable_measures() {
        let (s, orders) = binary2();
        let p = BehaviorTable::uniform(s);
        assert_eq!(causal_fraction(&p, &orders).unwrap(), int(1));
        assert_eq!(l1_distance_to_gluable(&p, &orders).unwrap(), int(0));
    }

    #[test]
    fn empty_order_list_rejected() {
        let (s, _) = binary2();
        let p = BehaviorTable::uniform(s);
        assert!(matches!(check_global_section(&p, &[]), Err(GlueError::NoOrders)));
    }

    #[test]
    fn degenerate_single_party() {
        let s = Scenario::new(parties(&["A"]), vec![3], vec![1]).unwrap();
        let orders = enumerate_total_orders(s.parties()).unwrap();
        let p = BehaviorTable::uniform(s);
        assert!(check_global_section(&p, &orders).unwrap().gluable);
    }
}
