use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::config::{Helicity, SpinNetworkConfig};
use super::moves::Generator;
use super::SpinDynError;

/// Primitive test inside an event conjunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    /// Twice-spin of the edge lies in the inclusive range.
    Spin { edge: usize, lo: u32, hi: u32 },
    Helicity { edge: usize, value: Helicity },
    /// Twice-spin of the designated clock edge lies in the inclusive range.
    Clock { lo: u32, hi: u32 },
    /// Membership by state index; for abstract generators.
    States(BTreeSet<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventPredicate {
    pub name: String,
    pub tests: Vec<Primitive>,
    pub clock_edge: Option<usize>,
}

impl EventPredicate {
    pub fn new(name: impl Into<String>, tests: Vec<Primitive>, clock_edge: Option<usize>) -> Self {
        EventPredicate {
            name: name.into(),
            tests,
            clock_edge,
        }
    }

    fn holds(&self, index: usize, config: Option<&SpinNetworkConfig>) -> Result<bool, SpinDynError> {
        for t in &self.tests {
            let ok = match t {
                Primitive::States(set) => set.contains(&index),
                Primitive::Spin { edge, lo, hi } => {
                    let s = self.config(config)?.twice_spin[*edge];
                    (*lo..=*hi).contains(&s)
                }
                Primitive::Helicity { edge, value } => self.config(config)?.helicity[*edge] == *value,
                Primitive::Clock { lo, hi } => {
                    let edge = self.clock_edge.ok_or_else(|| {
                        SpinDynError::InvalidModel(format!("event `{}` uses the clock but none is set", self.name))
                    })?;
                    (*lo..=*hi).contains(&self.config(config)?.twice_spin[edge])
                }
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn config<'a>(&self, c: Option<&'a SpinNetworkConfig>) -> Result<&'a SpinNetworkConfig, SpinDynError> {
        c.ok_or_else(|| SpinDynError::InvalidModel(format!("event `{}` needs configurations", self.name)))
    }

    /// Truth value on every state of the generator.
    pub fn mask(&self, gen: &Generator) -> Result<Vec<bool>, SpinDynError> {
        let edges = gen.state(0).map(|c| c.edge_count());
        for t in &self.tests {
            let edge = match t {
                Primitive::Spin { edge, .. } | Primitive::Helicity { edge, .. } => Some(*edge),
                Primitive::Clock { .. } => self.clock_edge,
                Primitive::States(_) => None,
            };
            if let (Some(e), Some(m)) = (edge, edges) {
                if e >= m {
                    return Err(SpinDynError::InvalidModel(format!(
                        "event `{}` references edge {e} of {m}",
                        self.name
                    )));
                }
            }
        }
        (0..gen.len()).map(|i| self.holds(i, gen.state(i))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub seed_state: usize,
    pub jump_times: Vec<f64>,
    /// One longer than `jump_times`; starts at `seed_state`.
    pub visited: Vec<usize>,
    pub rng_seed: u64,
    pub horizon: f64,
}

/// Mixes a master seed with a run index.
pub fn run_seed(master: u64, run: u64) -> u64 {
    let mut z = master ^ run.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_run(gen: &Generator, seed_state: usize, horizon: f64) -> Result<(), SpinDynError> {
    if seed_state >= gen.len() {
        return Err(SpinDynError::InvalidModel(format!("seed state {seed_state} out of range")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(SpinDynError::InvalidModel("horizon must be positive and finite".into()));
    }
    Ok(())
}

/// Exact event-driven path up to `horizon`; `stop` ends it early once true
/// on the state just entered.
fn run_path(
    gen: &Generator,
    seed_state: usize,
    horizon: f64,
    rng: &mut ChaCha8Rng,
    mut stop: impl FnMut(usize, f64) -> bool,
) -> (Vec<f64>, Vec<usize>) {
    let mut times = Vec::new();
    let mut visited = vec![seed_state];
    let mut t = 0.0;
    let mut s = seed_state;
    if stop(s, t) {
        return (times, visited);
    }
    loop {
        let total = gen.exit_rate(s);
        if total <= 0.0 {
            break;
        }
        t += Exp::new(total).expect("positive rate").sample(rng);
        if t > horizon {
            break;
        }
        let mut u = rng.random::<f64>() * total;
        let row = gen.row(s);
        let mut next = row.last().expect("nonempty row").0;
        for (j, r) in row {
            if u < r.approx {
                next = *j;
                break;
            }
            u -= r.approx;
        }
        s = next;
        times.push(t);
        visited.push(s);
        if stop(s, t) {
            break;
        }
    }
    (times, visited)
}

pub fn simulate_trajectory(
    gen: &Generator,
    seed_state: usize,
    horizon: f64,
    rng_seed: u64,
) -> Result<TrajectorySample, SpinDynError> {
    check_run(gen, seed_state, horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (jump_times, visited) = run_path(gen, seed_state, horizon, &mut rng, |_, _| false);
    Ok(TrajectorySample {
        seed_state,
        jump_times,
        visited,
        rng_seed,
        horizon,
    })
}

fn first_hit(sample: &TrajectorySample, mask: &[bool]) -> Option<(f64, usize)> {
    sample.visited.iter().enumerate().find(|(_, &s)| mask[s]).map(|(k, &s)| {
        let t = if k == 0 { 0.0 } else { sample.jump_times[k - 1] };
        (t, s)
    })
}

/// First time (possibly 0) the path sits in a state satisfying `event`.
pub fn hitting_time(
    sample: &TrajectorySample,
    event: &EventPredicate,
    gen: &Generator,
) -> Result<Option<f64>, SpinDynError> {
    let mask = event.mask(gen)?;
    Ok(first_hit(sample, &mask).map(|(t, _)| t))
}

/// Hitting times and entry states of several events on one path. Paths stop
/// once every event has fired.
pub(crate) fn simulate_hits(
    gen: &Generator,
    seed_state: usize,
    horizon: f64,
    masks: &[Vec<bool>],
    rng: &mut ChaCha8Rng,
) -> Vec<Option<(f64, usize)>> {
    let mut hits: Vec<Option<(f64, usize)>> = vec![None; masks.len()];
    run_path(gen, seed_state, horizon, rng, |s, t| {
        for (h, m) in hits.iter_mut().zip(masks) {
            if h.is_none() && m[s] {
                *h = Some((t, s));
            }
        }
        hits.iter().all(Option::is_some)
    });
    hits
}

/// Estimate with Wald 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub count: u64,
    pub samples: u64,
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn new(count: u64, samples: u64) -> Self {
        let p = count as f64 / samples as f64;
        Estimate {
            count,
            samples,
            value: p,
            half_width: 1.96 * (p * (1.0 - p) / samples as f64).sqrt(),
        }
    }

    /// Binomial standard error at a reference probability.
    pub fn standard_error_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} ({:.6} ± {:.6})",
            self.count, self.samples, self.value, self.half_width
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatistics {
    pub a_first: Estimate,
    pub b_first: Estimate,
    /// Simultaneous hits (including both at time 0) or neither within the horizon.
    pub tie_or_none: Estimate,
}

/// Race between two events. A run where only one event fires counts for
/// that event.
pub fn order_statistics(
    gen: &Generator,
    seed_state: usize,
    event_a: &EventPredicate,
    event_b: &EventPredicate,
    samples: u64,
    horizon: f64,
    master_seed: u64,
) -> Result<OrderStatistics, SpinDynError> {
    check_run(gen, seed_state, horizon)?;
    if samples == 0 {
        return Err(SpinDynError::InvalidModel("at least one sample is required".into()));
    }
    let masks = [event_a.mask(gen)?, event_b.mask(gen)?];
    let (a, b) = (0..samples)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed(master_seed, run));
            let hits = simulate_hits(gen, seed_state, horizon, &masks, &mut rng);
            let ta = hits[0].map_or(f64::INFINITY, |h| h.0);
            let tb = hits[1].map_or(f64::INFINITY, |h| h.0);
            ((ta < tb) as u64, (tb < ta) as u64)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(OrderStatistics {
        a_first: Estimate::new(a, samples),
        b_first: Estimate::new(b, samples),
        tie_or_none: Estimate::new(samples - a - b, samples),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub horizon: f64,
    pub counts: Vec<u64>,
    /// Unit mass over bins, or all zero without hits.
    pub mass: Vec<f64>,
    pub hits: u64,
    pub samples: u64,
}

impl Histogram {
    pub fn from_times(times: &[f64], samples: u64, horizon: f64, bins: usize) -> Self {
        let mut counts = vec![0u64; bins];
        for &t in times {
            let b = ((t / horizon) * bins as f64).floor() as usize;
            counts[b.min(bins - 1)] += 1;
        }
        let hits = times.len() as u64;
        let mass = counts
            .iter()
            .map(|&c| if hits == 0 { 0.0 } else { c as f64 / hits as f64 })
            .collect();
        Histogram {
            horizon,
            counts,
            mass,
            hits,
            samples,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.horizon / self.bins() as f64
    }

    pub fn hit_fraction(&self) -> f64 {
        self.hits as f64 / self.samples as f64
    }
}

/// Hitting-time envelope conditioned on hitting within the horizon.
pub fn envelope_histogram(
    gen: &Generator,
    seed_state: usize,
    event: &EventPredicate,
    samples: u64,
    horizon: f64,
    bins: usize,
    master_seed: u64,
) -> Result<Histogram, SpinDynError> {
    check_run(gen, seed_state, horizon)?;
    if bins == 0 || samples == 0 {
        return Err(SpinDynError::InvalidModel("bins and samples must be positive".into()));
    }
    let masks = [event.mask(gen)?];
    let mut times: Vec<(u64, f64)> = (0..samples)
        .into_par_iter()
        .filter_map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed(master_seed, run));
            simulate_hits(gen, seed_state, horizon, &masks, &mut rng)[0].map(|h| (run, h.0))
        })
        .collect();
    times.sort_by_key(|&(run, _)| run);
    let times: Vec<f64> = times.into_iter().map(|(_, t)| t).collect();
    Ok(Histogram::from_times(&times, samples, horizon, bins))
}

/// Overlap coefficient `Σ min(fA, fB)`.
pub fn envelope_overlap(fa: &Histogram, fb: &Histogram) -> Result<f64, SpinDynError> {
    if fa.bins() != fb.bins() || fa.horizon != fb.horizon {
        return Err(SpinDynError::BinMismatch);
    }
    Ok(fa.mass.iter().zip(&fb.mass).map(|(a, b)| a.min(*b)).sum())
}

/// Fraction of runs in each state at time `tau`, for comparison with
/// `evolve_density`.
pub fn empirical_occupancy(
    gen: &Generator,
    seed_state: usize,
    tau: f64,
    samples: u64,
    master_seed: u64,
) -> Result<Vec<u64>, SpinDynError> {
    check_run(gen, seed_state, tau)?;
    let finals: Vec<usize> = (0..samples)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed(master_seed, run));
            let (_, visited) = run_path(gen, seed_state, tau, &mut rng, |_, _| false);
            *visited.last().expect("path is nonempty")
        })
        .collect();
    let mut counts = vec![0u64; gen.len()];
    for s in finals {
        counts[s] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::spindyn::moves::Rate;

    fn states(v: &[usize]) -> Primitive {
        Primitive::States(v.iter().copied().collect())
    }

    /// 0 fires A (rate 1, to 1) or B (rate 3, to 2); both absorbing.
    fn race() -> Generator {
        Generator::from_rates(3, vec![(0, 1, Rate::exact(int(1))), (0, 2, Rate::exact(int(3)))]).unwrap()
    }

    #[test]
    fn zero_rate_generator_never_jumps() {
        let g = Generator::from_rates(1, vec![]).unwrap();
        let s = simulate_trajectory(&g, 0, 10.0, 7).unwrap();
        assert!(s.jump_times.is_empty());
        assert_eq!(s.visited, vec![0]);
    }

    #[test]
    fn same_seed_same_path() {
        let g = Generator::from_rates(2, vec![(0, 1, Rate::exact(int(2))), (1, 0, Rate::exact(int(1)))]).unwrap();
        let a = simulate_trajectory(&g, 0, 50.0, 99).unwrap();
        let b = simulate_trajectory(&g, 0, 50.0, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.jump_times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a.visited.len(), a.jump_times.len() + 1);
    }

    #[test]
    fn hitting_at_start_and_never() {
        let g = race();
        let s = simulate_trajectory(&g, 0, 10.0, 1).unwrap();
        let at_seed = EventPredicate::new("S", vec![states(&[0])], None);
        assert_eq!(hitting_time(&s, &at_seed, &g).unwrap(), Some(0.0));
        let never = EventPredicate::new("N", vec![states(&[])], None);
        assert_eq!(hitting_time(&s, &never, &g).unwrap(), None);
    }

    #[test]
    fn exponential_race() {
        let g = race();
        let a = EventPredicate::new("A", vec![states(&[1])], None);
        let b = EventPredicate::new("B", vec![states(&[2])], None);
        let st = order_statistics(&g, 0, &a, &b, 20_000, 50.0, 42).unwrap();
        let se = st.a_first.standard_error_at(0.25);
        assert!((st.a_first.value - 0.25).abs() < 3.0 * se);
        assert_eq!(st.a_first.count + st.b_first.count + st.tie_or_none.count, 20_000);
        let same = order_statistics(&g, 0, &a, &a, 100, 50.0, 1).unwrap();
        assert_eq!(same.tie_or_none.count, 100);
    }

    #[test]
    fn envelopes() {
        let g = race();
        let a = EventPredicate::new("A", vec![states(&[1])], None);
        let b = EventPredicate::new("B", vec![states(&[2])], None);
        let fa = envelope_histogram(&g, 0, &a, 5000, 4.0, 8, 3).unwrap();
        let fb = envelope_histogram(&g, 0, &b, 5000, 4.0, 8, 3).unwrap();
        assert!((fa.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let ov = envelope_overlap(&fa, &fb).unwrap();
        assert!(ov > 0.0 && ov < 1.0);
        assert_eq!(envelope_overlap(&fa, &fa).unwrap(), 1.0);

        let start = EventPredicate::new("S", vec![states(&[0])], None);
        let fs = envelope_histogram(&g, 0, &start, 10, 4.0, 8, 3).unwrap();
        assert_eq!(fs.mass[0], 1.0);
        let never = EventPredicate::new("N", vec![states(&[])], None);
        let fnv = envelope_histogram(&g, 0, &never, 10, 4.0, 8, 3).unwrap();
        assert_eq!(fnv.hit_fraction(), 0.0);
        assert!(fnv.mass.iter().all(|&m| m == 0.0));
        let other = envelope_histogram(&g, 0, &a, 10, 4.0, 4, 3).unwrap();
        assert!(matches!(envelope_overlap(&fa, &other), Err(SpinDynError::BinMismatch)));

        let disjoint_a = Histogram::from_times(&[0.1], 1, 1.0, 2);
        let disjoint_b = Histogram::from_times(&[0.9], 1, 1.0, 2);
        assert_eq!(envelope_overlap(&disjoint_a, &disjoint_b).unwrap(), 0.0);
    }

    #[test]
    fn seeds_differ_by_run() {
        assert_ne!(run_seed(1, 0), run_seed(1, 1));
        assert_ne!(run_seed(1, 0), run_seed(2, 0));
    }
}
