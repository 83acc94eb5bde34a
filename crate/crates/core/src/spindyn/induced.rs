//! Operational statistics induced by interventions that act once, at the
//! hitting time of each party's event.
//!
//! Every run draws one trajectory and one uniform per party, shared by all
//! settings tuples. A run therefore realises a deterministic strategy in
//! which a party can only see the settings of parties that fired strictly
//! earlier, and the table is an equal-weight mixture of such strategies.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Helicity, SpinNetworkConfig};
use super::moves::Generator;
use super::trajectory::{run_seed, simulate_hits, EventPredicate};
use super::SpinDynError;
use crate::contexts::Party;
use crate::gluing::{BehaviorTable, Scenario};
use crate::rational::{fmt_exact, to_f64, Rational};

/// Label for the reserved outcome of a party whose event never fires.
pub const NO_HIT: &str = "nohit";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    /// Setting of another party, visible only if it fired strictly earlier.
    Record(usize),
    Spin(usize),
    Helicity(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureValue {
    Unseen,
    Setting(usize),
    Spin(u32),
    Helicity(Helicity),
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Unseen => f.write_str("-"),
            FeatureValue::Setting(x) => write!(f, "{x}"),
            FeatureValue::Spin(s) => write!(f, "{s}"),
            FeatureValue::Helicity(h) => write!(f, "{h}"),
        }
    }
}

/// Kernel row; `None` entries match anything.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub setting: Option<usize>,
    pub features: Vec<Option<FeatureValue>>,
    pub probabilities: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intervention {
    pub party: String,
    pub event: EventPredicate,
    pub settings: usize,
    /// Declared outcomes; the no-hit outcome is appended after these.
    pub outcomes: usize,
    pub features: Vec<Feature>,
    /// First matching row wins.
    pub kernel: Vec<KernelRow>,
}

impl Intervention {
    pub fn validate(&self, parties: usize) -> Result<(), SpinDynError> {
        let err = |m: String| SpinDynError::KernelNormalization(format!("party {}: {m}", self.party));
        if self.settings == 0 || self.outcomes == 0 {
            return Err(err("settings and outcomes must be positive".into()));
        }
        for f in &self.features {
            if let Feature::Record(p) = f {
                if *p >= parties {
                    return Err(err(format!("record of unknown party index {p}")));
                }
            }
        }
        for (k, row) in self.kernel.iter().enumerate() {
            if row.features.len() != self.features.len() {
                return Err(err(format!("kernel row {k} has {} feature columns", row.features.len())));
            }
            if row.setting.is_some_and(|x| x >= self.settings) {
                return Err(err(format!("kernel row {k} names an unknown setting")));
            }
            if row.probabilities.len() != self.outcomes {
                return Err(err(format!(
                    "kernel row {k} has {} probabilities, expected {}",
                    row.probabilities.len(),
                    self.outcomes
                )));
            }
            if row.probabilities.iter().any(|p| p.is_negative()) {
                return Err(err(format!("kernel row {k} has a negative entry")));
            }
            let sum: Rational = row.probabilities.iter().sum();
            if !sum.is_one() {
                return Err(err(format!("kernel row {k} sums to {}", fmt_exact(&sum))));
            }
        }
        Ok(())
    }

    fn row_for(&self, setting: usize, values: &[FeatureValue]) -> Option<&KernelRow> {
        self.kernel.iter().find(|r| {
            r.setting.is_none_or(|x| x == setting)
                && r.features.iter().zip(values).all(|(want, got)| want.is_none_or(|w| w == *got))
        })
    }
}

/// Behaviour scenario: declared outcomes plus the reserved no-hit outcome.
pub fn induced_scenario(interventions: &[Intervention]) -> Result<Scenario, SpinDynError> {
    let parties = interventions
        .iter()
        .enumerate()
        .map(|(i, iv)| Party::new(iv.party.clone(), i))
        .collect();
    Ok(Scenario::new(
        parties,
        interventions.iter().map(|iv| iv.settings).collect(),
        interventions.iter().map(|iv| iv.outcomes + 1).collect(),
    )?)
}

#[derive(Debug, Clone)]
pub struct InducedBehavior {
    pub table: BehaviorTable,
    pub counts: Vec<u64>,
    pub samples: u64,
    /// Per party: runs in which its event never fired.
    pub no_hit_runs: Vec<u64>,
}

fn features_at(
    iv: &Intervention,
    me: usize,
    hits: &[Option<(f64, usize)>],
    settings: &[usize],
    state: &SpinNetworkConfig,
) -> Vec<FeatureValue> {
    let my_time = hits[me].expect("party fired").0;
    iv.features
        .iter()
        .map(|f| match *f {
            Feature::Record(p) => match hits[p] {
                Some((t, _)) if t < my_time => FeatureValue::Setting(settings[p]),
                _ => FeatureValue::Unseen,
            },
            Feature::Spin(e) => FeatureValue::Spin(state.twice_spin[e]),
            Feature::Helicity(e) => FeatureValue::Helicity(state.helicity[e]),
        })
        .collect()
}

fn draw(probabilities: &[Rational], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, p) in probabilities.iter().enumerate() {
        acc += to_f64(p);
        if u < acc {
            return k;
        }
    }
    // rounding in the float cumulative sum: last positive entry
    probabilities.iter().rposition(|p| p.is_positive()).unwrap_or(0)
}

/// Outcome per party and which events fired, for one trajectory.
type RunRecord = (Vec<usize>, Vec<bool>);

pub fn induced_behavior(
    gen: &Generator,
    seed_state: usize,
    interventions: &[Intervention],
    samples: u64,
    horizon: f64,
    master_seed: u64,
) -> Result<InducedBehavior, SpinDynError> {
    if interventions.is_empty() {
        return Err(SpinDynError::InvalidModel("no interventions declared".into()));
    }
    if samples == 0 {
        return Err(SpinDynError::InvalidModel("at least one sample is required".into()));
    }
    if !(horizon.is_finite() && horizon > 0.0) || seed_state >= gen.len() {
        return Err(SpinDynError::InvalidModel("bad horizon or seed state".into()));
    }
    let n = interventions.len();
    for iv in interventions {
        iv.validate(n)?;
        let edges = gen.state(0).map_or(0, |c| c.edge_count());
        for f in &iv.features {
            if let Feature::Spin(e) | Feature::Helicity(e) = f {
                if *e >= edges {
                    return Err(SpinDynError::InvalidModel(format!("party {} reads unknown edge {e}", iv.party)));
                }
            }
        }
    }
    let scenario = induced_scenario(interventions)?;
    let masks: Vec<Vec<bool>> = interventions.iter().map(|iv| iv.event.mask(gen)).collect::<Result<_, _>>()?;
    let nx = scenario.setting_tuples();

    let per_run: Vec<Result<RunRecord, SpinDynError>> = (0..samples)
        .into_par_iter()
        .map(|run| {
            let seed = run_seed(master_seed, run);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let hits = simulate_hits(gen, seed_state, horizon, &masks, &mut rng);
            let mut kernel_rng = ChaCha8Rng::seed_from_u64(seed);
            kernel_rng.set_stream(1);
            let uniforms: Vec<f64> = (0..n).map(|_| kernel_rng.random::<f64>()).collect();

            let mut entries = Vec::with_capacity(nx);
            for x in 0..nx {
                let xs = scenario.setting_tuple(x);
                let mut a = vec![0usize; n];
                for (k, iv) in interventions.iter().enumerate() {
                    a[k] = match hits[k] {
                        None => iv.outcomes,
                        Some((_, s)) => {
                            let state = gen.state(s).ok_or_else(|| {
                                SpinDynError::InvalidModel("interventions need configurations".into())
                            })?;
                            let values = features_at(iv, k, &hits, &xs, state);
                            let row = iv.row_for(xs[k], &values).ok_or_else(|| SpinDynError::KernelNoMatch {
                                party: iv.party.clone(),
                                setting: xs[k],
                                features: values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
                            })?;
                            draw(&row.probabilities, uniforms[k])
                        }
                    };
                }
                entries.push(scenario.entry(x, scenario.outcome_index(&a)));
            }
            Ok((entries, hits.iter().map(Option::is_none).collect()))
        })
        .collect();

    let mut counts = vec![0u64; scenario.entries()];
    let mut no_hit_runs = vec![0u64; n];
    for r in per_run {
        let (entries, missed) = r?;
        for e in entries {
            counts[e] += 1;
        }
        for (c, m) in no_hit_runs.iter_mut().zip(missed) {
            *c += m as u64;
        }
    }
    let denom = BigInt::from(samples);
    let p = counts
        .iter()
        .map(|&c| Rational::new(BigInt::from(c), denom.clone()))
        .collect();
    Ok(InducedBehavior {
        table: BehaviorTable::new(scenario, p)?,
        counts,
        samples,
        no_hit_runs,
    })
}
