//! Deterministic strategies compatible with a total order: the vertices of
//! its one-way signalling polytope.

use super::behavior::{encode, BehaviorTable, Scenario};
use super::constraints::check_orders_match;
use super::GlueError;
use crate::contexts::CausalOrder;

pub const MAX_STRATEGIES: u128 = 1_000_000;

/// Number of deterministic strategies for `order`, or `None` past `u128`.
pub fn count_deterministic_strategies(scenario: &Scenario, order: &CausalOrder) -> Result<Option<u128>, GlueError> {
    let seq = check_orders_match(scenario, order)?;
    let mut domain: u128 = 1;
    let mut total: u128 = 1;
    for &party in &seq {
        domain = domain.saturating_mul(scenario.settings()[party] as u128);
        let Ok(exp) = u32::try_from(domain) else {
            return Ok(None);
        };
        let Some(funcs) = (scenario.outcomes()[party] as u128).checked_pow(exp) else {
            return Ok(None);
        };
        match total.checked_mul(funcs) {
            Some(t) => total = t,
            None => return Ok(None),
        }
    }
    Ok(Some(total))
}

/// Every strategy where the k-th party in `order` answers with a function of
/// the settings of the first k parties. Odometer order, first party slowest.
pub fn enumerate_deterministic_strategies(
    scenario: &Scenario,
    order: &CausalOrder,
) -> Result<Vec<BehaviorTable>, GlueError> {
    let seq = check_orders_match(scenario, order)?;
    match count_deterministic_strategies(scenario, order)? {
        Some(n) if n <= MAX_STRATEGIES => {}
        _ => {
            return Err(GlueError::Size(format!(
                "more than {MAX_STRATEGIES} deterministic strategies"
            )))
        }
    }

    // Domain of party seq[k]'s response: settings of seq[0..=k].
    let domains: Vec<Vec<usize>> = (0..seq.len())
        .map(|k| seq[..=k].iter().map(|&i| scenario.settings()[i]).collect())
        .collect();
    let mut tables: Vec<Vec<usize>> = domains
        .iter()
        .map(|d| vec![0; d.iter().product()])
        .collect();

    let mut out = Vec::new();
    loop {
        let table = BehaviorTable::deterministic(scenario.clone(), |x| {
            let mut a = vec![0; seq.len()];
            for (k, &party) in seq.iter().enumerate() {
                let local: Vec<usize> = seq[..=k].iter().map(|&i| x[i]).collect();
                let idx = encode(&local, &domains[k]);
                a[party] = tables[k][idx];
            }
            a
        })?;
        out.push(table);

        // advance the odometer, last party's table fastest
        let mut carry = true;
        for k in (0..seq.len()).rev() {
            let base = scenario.outcomes()[seq[k]];
            for digit in tables[k].iter_mut().rev() {
                *digit += 1;
                if *digit < base {
                    carry = false;
                    break;
                }
                *digit = 0;
            }
            if !carry {
                break;
            }
        }
        if carry {
            break;
        }
    }
    Ok(out)
}
