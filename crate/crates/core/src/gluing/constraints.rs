//! One-way signalling constraints induced by a total order.
//!
//! For every proper nonempty prefix `P` of the order, the marginal on `P`
//! must not depend on the settings of the parties after `P`. Rows whose
//! outcome for the last prefix party is that party's final outcome are
//! implied by normalisation and the shorter prefixes, so they are omitted.

use num_traits::Zero;

use super::behavior::{decode, BehaviorTable, Scenario};
use super::GlueError;
use crate::contexts::CausalOrder;
use crate::rational::Rational;

/// Homogeneous linear row `sum(coeff * p[entry]) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignallingConstraint {
    /// Parties of the prefix, in order.
    pub prefix: Vec<usize>,
    pub terms: Vec<(usize, i64)>,
}

impl SignallingConstraint {
    pub fn evaluate(&self, p: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|&(e, c)| &p[e] * Rational::from_integer(c.into()))
            .sum()
    }
}

pub(crate) fn check_orders_match(scenario: &Scenario, order: &CausalOrder) -> Result<Vec<usize>, GlueError> {
    if order.parties() != scenario.parties() {
        return Err(GlueError::Shape("order and scenario use different parties".into()));
    }
    order.sequence().ok_or_else(|| GlueError::NonTotalOrder(order.to_string()))
}

pub fn order_constraints(
    scenario: &Scenario,
    order: &CausalOrder,
) -> Result<Vec<SignallingConstraint>, GlueError> {
    let seq = check_orders_match(scenario, order)?;
    let n = seq.len();
    let mut rows = Vec::new();
    for k in 1..n {
        let prefix = &seq[..k];
        let rest = &seq[k..];
        let radix = |parties: &[usize], card: &[usize]| -> Vec<usize> {
            parties.iter().map(|&i| card[i]).collect()
        };
        let (ps, po) = (radix(prefix, scenario.settings()), radix(prefix, scenario.outcomes()));
        let (rs, ro) = (radix(rest, scenario.settings()), radix(rest, scenario.outcomes()));
        let (n_ps, n_po) = (ps.iter().product::<usize>(), po.iter().product::<usize>());
        let (n_rs, n_ro) = (rs.iter().product::<usize>(), ro.iter().product::<usize>());
        let last_outcomes = *po.last().unwrap();

        // Entry of p(a_P a_R | x_P x_R) in the full table.
        let entry = |xp: &[usize], xr: &[usize], ap: &[usize], ar: &[usize]| {
            let mut x = vec![0; n];
            let mut a = vec![0; n];
            for (slot, &party) in prefix.iter().enumerate() {
                x[party] = xp[slot];
                a[party] = ap[slot];
            }
            for (slot, &party) in rest.iter().enumerate() {
                x[party] = xr[slot];
                a[party] = ar[slot];
            }
            scenario.entry(scenario.setting_index(&x), scenario.outcome_index(&a))
        };

        let reference = decode(0, &rs);
        for xp_i in 0..n_ps {
            let xp = decode(xp_i, &ps);
            for ap_i in 0..n_po {
                let ap = decode(ap_i, &po);
                if *ap.last().unwrap() == last_outcomes - 1 {
                    continue;
                }
                for xr_i in 1..n_rs {
                    let xr = decode(xr_i, &rs);
                    let mut terms = Vec::with_capacity(2 * n_ro);
                    for ar_i in 0..n_ro {
                        let ar = decode(ar_i, &ro);
                        terms.push((entry(&xp, &xr, &ap, &ar), 1));
                        terms.push((entry(&xp, &reference, &ap, &ar), -1));
                    }
                    rows.push(SignallingConstraint {
                        prefix: prefix.to_vec(),
                        terms,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Rows equating the total mass of every settings tuple with that of tuple 0.
/// Needed for unnormalised cone variables; tables satisfy them by construction.
pub fn mass_constraints(scenario: &Scenario) -> Vec<Vec<(usize, i64)>> {
    let no = scenario.outcome_tuples();
    (1..scenario.setting_tuples())
        .map(|x| {
            (0..no)
                .map(|a| (scenario.entry(x, a), 1))
                .chain((0..no).map(|a| (scenario.entry(0, a), -1)))
                .collect()
        })
        .collect()
}

/// Exact check of every one-way signalling row for a total order.
pub fn is_compatible_with_order(p: &BehaviorTable, order: &CausalOrder) -> Result<bool, GlueError> {
    let rows = order_constraints(p.scenario(), order)?;
    Ok(rows.iter().all(|r| r.evaluate(p.probabilities()).is_zero()))
}

/// Admissibility in a partial-order context: compatible with every linear extension.
pub fn is_admissible_in_context(p: &BehaviorTable, order: &CausalOrder) -> Result<bool, GlueError> {
    if order.parties() != p.scenario().parties() {
        return Err(GlueError::Shape("order and scenario use different parties".into()));
    }
    for ext in order.linear_extensions() {
        if !is_compatible_with_order(p, &ext)? {
            return Ok(false);
        }
    }
    Ok(true)
}
