use std::fmt;

use num_traits::{One, Signed, Zero};

use super::GlueError;
use crate::contexts::{validate_parties, Party};
use crate::rational::{fmt_exact, Rational};

/// Largest admissible table size (setting tuples times outcome tuples).
pub const MAX_TABLE_ENTRIES: usize = 1_000_000;

/// Party list with per-party setting and outcome cardinalities.
///
/// Tuples are indexed in mixed radix with party 0 most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    parties: Vec<Party>,
    settings: Vec<usize>,
    outcomes: Vec<usize>,
}

impl Scenario {
    pub fn new(parties: Vec<Party>, settings: Vec<usize>, outcomes: Vec<usize>) -> Result<Self, GlueError> {
        validate_parties(&parties)?;
        if parties.is_empty() {
            return Err(GlueError::Shape("scenario has no parties".into()));
        }
        if settings.len() != parties.len() || outcomes.len() != parties.len() {
            return Err(GlueError::Shape(format!(
                "{} parties but {} setting and {} outcome cardinalities",
                parties.len(),
                settings.len(),
                outcomes.len()
            )));
        }
        if settings.iter().chain(&outcomes).any(|&k| k == 0) {
            return Err(GlueError::Shape("cardinalities must be at least 1".into()));
        }
        let size = settings
            .iter()
            .chain(&outcomes)
            .try_fold(1usize, |acc, &k| acc.checked_mul(k))
            .filter(|&s| s <= MAX_TABLE_ENTRIES);
        if size.is_none() {
            return Err(GlueError::Size(format!(
                "behaviour table exceeds {MAX_TABLE_ENTRIES} entries"
            )));
        }
        Ok(Scenario {
            parties,
            settings,
            outcomes,
        })
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn setting_tuples(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn outcome_tuples(&self) -> usize {
        self.outcomes.iter().product()
    }

    pub fn entries(&self) -> usize {
        self.setting_tuples() * self.outcome_tuples()
    }

    pub fn entry(&self, setting: usize, outcome: usize) -> usize {
        setting * self.outcome_tuples() + outcome
    }

    pub fn split_entry(&self, entry: usize) -> (usize, usize) {
        (entry / self.outcome_tuples(), entry % self.outcome_tuples())
    }

    pub fn setting_index(&self, tuple: &[usize]) -> usize {
        encode(tuple, &self.settings)
    }

    pub fn outcome_index(&self, tuple: &[usize]) -> usize {
        encode(tuple, &self.outcomes)
    }

    pub fn setting_tuple(&self, index: usize) -> Vec<usize> {
        decode(index, &self.settings)
    }

    pub fn outcome_tuple(&self, index: usize) -> Vec<usize> {
        decode(index, &self.outcomes)
    }
}

pub(crate) fn encode(tuple: &[usize], radix: &[usize]) -> usize {
    debug_assert_eq!(tuple.len(), radix.len());
    tuple
        .iter()
        .zip(radix)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

pub(crate) fn decode(mut index: usize, radix: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radix.len()];
    for k in (0..radix.len()).rev() {
        out[k] = index % radix[k];
        index /= radix[k];
    }
    out
}

/// Conditional distribution `p(outcomes | settings)` with exact entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BehaviorTable {
    scenario: Scenario,
    p: Vec<Rational>,
}

impl BehaviorTable {
    /// Validates nonnegativity and exact normalisation of every settings row.
    pub fn new(scenario: Scenario, p: Vec<Rational>) -> Result<Self, GlueError> {
        if p.len() != scenario.entries() {
            return Err(GlueError::Shape(format!(
                "expected {} entries, got {}",
                scenario.entries(),
                p.len()
            )));
        }
        if let Some(e) = p.iter().position(|q| q.is_negative()) {
            let (x, a) = scenario.split_entry(e);
            return Err(GlueError::NegativeProbability {
                settings: scenario.setting_tuple(x),
                outcomes: scenario.outcome_tuple(a),
            });
        }
        let no = scenario.outcome_tuples();
        for x in 0..scenario.setting_tuples() {
            let sum: Rational = p[x * no..(x + 1) * no].iter().sum();
            if !sum.is_one() {
                return Err(GlueError::Normalization {
                    settings: scenario.setting_tuple(x),
                    sum: fmt_exact(&sum),
                });
            }
        }
        Ok(BehaviorTable { scenario, p })
    }

    /// Table with `p(a|x) = f(x, a)` over tuples.
    pub fn from_fn(
        scenario: Scenario,
        mut f: impl FnMut(&[usize], &[usize]) -> Rational,
    ) -> Result<Self, GlueError> {
        let mut p = Vec::with_capacity(scenario.entries());
        for x in 0..scenario.setting_tuples() {
            let xs = scenario.setting_tuple(x);
            for a in 0..scenario.outcome_tuples() {
                p.push(f(&xs, &scenario.outcome_tuple(a)));
            }
        }
        BehaviorTable::new(scenario, p)
    }

    /// Each party's outcome a deterministic function of the full settings tuple.
    pub fn deterministic(
        scenario: Scenario,
        mut response: impl FnMut(&[usize]) -> Vec<usize>,
    ) -> Result<Self, GlueError> {
        BehaviorTable::from_fn(scenario, |x, a| {
            if response(x) == a {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let w = Rational::new(1.into(), scenario.outcome_tuples().into());
        let p = vec![w; scenario.entries()];
        BehaviorTable { scenario, p }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn probabilities(&self) -> &[Rational] {
        &self.p
    }

    pub fn get(&self, settings: &[usize], outcomes: &[usize]) -> &Rational {
        let e = self
            .scenario
            .entry(self.scenario.setting_index(settings), self.scenario.outcome_index(outcomes));
        &self.p[e]
    }

    /// `weight * self + (1 - weight) * other`.
    pub fn mix(&self, weight: &Rational, other: &BehaviorTable) -> Result<Self, GlueError> {
        if self.scenario != other.scenario {
            return Err(GlueError::Shape("mixing tables of different scenarios".into()));
        }
        let rest = Rational::one() - weight;
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| weight * a + &rest * b)
            .collect();
        BehaviorTable::new(self.scenario.clone(), p)
    }

    /// Unweighted sum of absolute entry differences.
    pub fn l1_to(&self, other: &BehaviorTable) -> Rational {
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

impl fmt::Display for BehaviorTable {
    /// Nonzero entries in `[behavior]` line syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<usize>| {
            v.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        for (e, q) in self.p.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let (x, a) = self.scenario.split_entry(e);
            writeln!(
                f,
                "{} ; {} ; {}",
                join(self.scenario.setting_tuple(x)),
                join(self.scenario.outcome_tuple(a)),
                fmt_exact(q)
            )?;
        }
        Ok(())
    }
}
