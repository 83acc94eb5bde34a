use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::config::{admissible, edge_cost, triad_admissible, Helicity, SpinNetworkConfig};
use super::SpinDynError;
use crate::rational::{to_f64, Rational};

pub const MAX_STATES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    SpinStep,
    HelicityFlip,
    Recouple,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::SpinStep => "spin",
            MoveKind::HelicityFlip => "helicity",
            MoveKind::Recouple => "recouple",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveCatalogue {
    pub kinds: Vec<MoveKind>,
    pub r0: Rational,
    pub beta: f64,
    pub gamma: Rational,
    /// Inclusive twice-spin bounds for spin steps.
    pub spin_window: (u32, u32),
    /// `None` enables the move on every edge.
    pub spin_edges: Option<Vec<usize>>,
    pub helicity_edges: Option<Vec<usize>>,
    pub recouple_edges: Option<Vec<usize>>,
    /// Per-edge rate multiplier for moves acting on that edge (default 1).
    pub scale: BTreeMap<usize, Rational>,
}

impl Default for MoveCatalogue {
    fn default() -> Self {
        MoveCatalogue {
            kinds: Vec::new(),
            r0: Rational::one(),
            beta: 0.0,
            gamma: Rational::one(),
            spin_window: (0, 8),
            spin_edges: None,
            helicity_edges: None,
            recouple_edges: None,
            scale: BTreeMap::new(),
        }
    }
}

impl MoveCatalogue {
    pub fn validate(&self, edges: usize) -> Result<(), SpinDynError> {
        if !self.r0.is_positive() {
            return Err(SpinDynError::InvalidModel("r0 must be positive".into()));
        }
        if !self.gamma.is_positive() {
            return Err(SpinDynError::InvalidModel("gamma must be positive".into()));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(SpinDynError::InvalidModel("beta must be finite and nonnegative".into()));
        }
        if self.spin_window.0 > self.spin_window.1 {
            return Err(SpinDynError::InvalidModel("empty spin window".into()));
        }
        let lists = [&self.spin_edges, &self.helicity_edges, &self.recouple_edges];
        let listed = lists.into_iter().flatten().flatten().chain(self.scale.keys());
        if let Some(e) = listed.into_iter().find(|&&e| e >= edges) {
            return Err(SpinDynError::InvalidModel(format!("edge index {e} out of range")));
        }
        if self.scale.values().any(|s| !s.is_positive()) {
            return Err(SpinDynError::InvalidModel("rate scales must be positive".into()));
        }
        Ok(())
    }

    fn enabled(&self, kind: MoveKind) -> bool {
        self.kinds.contains(&kind)
    }

    fn on_edge(list: &Option<Vec<usize>>, e: usize) -> bool {
        list.as_ref().is_none_or(|l| l.contains(&e))
    }

    fn scale_of(&self, e: usize) -> Rational {
        self.scale.get(&e).cloned().unwrap_or_else(Rational::one)
    }

    /// `r0 · exp(−β ΔC) · γ^{Δh⁺} · scale(e)`.
    pub fn rate(&self, from: &SpinNetworkConfig, to: &SpinNetworkConfig, edge: usize) -> Rate {
        let raised = from
            .helicity
            .iter()
            .zip(&to.helicity)
            .filter(|(a, b)| **a == Helicity::Minus && **b == Helicity::Plus)
            .count();
        let mut base = &self.r0 * self.scale_of(edge);
        for _ in 0..raised {
            base *= &self.gamma;
        }
        if self.beta == 0.0 || from.twice_spin == to.twice_spin {
            return Rate::exact(base);
        }
        let delta: f64 = from
            .twice_spin
            .iter()
            .zip(&to.twice_spin)
            .map(|(&a, &b)| edge_cost(b) - edge_cost(a))
            .sum();
        Rate::approx(to_f64(&base) * (-self.beta * delta).exp())
    }
}

/// Transition rate; exact whenever the rate law involves no exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct Rate {
    pub exact: Option<Rational>,
    pub approx: f64,
}

impl Rate {
    pub fn exact(q: Rational) -> Self {
        Rate {
            approx: to_f64(&q),
            exact: Some(q),
        }
    }

    pub fn approx(x: f64) -> Self {
        Rate { exact: None, approx: x }
    }
}

/// Sparse generator: off-diagonal rates per row, diagonal implied.
#[derive(Debug, Clone)]
pub struct Generator {
    states: Vec<SpinNetworkConfig>,
    index: HashMap<SpinNetworkConfig, usize>,
    rows: Vec<Vec<(usize, Rate)>>,
    truncated: bool,
}

impl Generator {
    /// Abstract chain on `n` states without configurations.
    pub fn from_rates(n: usize, entries: Vec<(usize, usize, Rate)>) -> Result<Self, SpinDynError> {
        let mut rows: Vec<Vec<(usize, Rate)>> = vec![Vec::new(); n];
        for (i, j, r) in entries {
            if i >= n || j >= n || i == j {
                return Err(SpinDynError::InvalidModel(format!("bad transition {i} -> {j}")));
            }
            if !(r.approx.is_finite() && r.approx >= 0.0) {
                return Err(SpinDynError::InvalidModel(format!("bad rate on {i} -> {j}")));
            }
            if r.approx > 0.0 {
                rows[i].push((j, r));
            }
        }
        Ok(Generator {
            states: Vec::new(),
            index: HashMap::new(),
            rows,
            truncated: false,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn states(&self) -> &[SpinNetworkConfig] {
        &self.states
    }

    pub fn state(&self, i: usize) -> Option<&SpinNetworkConfig> {
        self.states.get(i)
    }

    pub fn index_of(&self, config: &SpinNetworkConfig) -> Option<usize> {
        self.index.get(config).copied()
    }

    pub fn row(&self, i: usize) -> &[(usize, Rate)] {
        &self.rows[i]
    }

    /// Some moves were dropped because they left the state cap.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|(_, r)| r.approx).sum()
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.len()).map(|i| self.exit_rate(i)).fold(0.0, f64::max)
    }

    pub fn is_exact(&self) -> bool {
        self.rows.iter().flatten().all(|(_, r)| r.exact.is_some())
    }

    pub fn exact_rate(&self, i: usize, j: usize) -> Option<Rational> {
        if i == j {
            let mut total = Rational::zero();
            for (_, r) in &self.rows[i] {
                total += r.exact.as_ref()?;
            }
            return Some(-total);
        }
        let mut total = Rational::zero();
        for (k, r) in &self.rows[i] {
            if *k == j {
                total += r.exact.as_ref()?;
            }
        }
        Some(total)
    }

    pub fn transition_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Successor configurations of `c` under the catalogue, with the acted-on edge.
fn neighbours(c: &SpinNetworkConfig, moves: &MoveCatalogue) -> Vec<(SpinNetworkConfig, usize)> {
    let mut out = Vec::new();
    let m = c.edge_count();
    if moves.enabled(MoveKind::SpinStep) {
        let (lo, hi) = moves.spin_window;
        for e in (0..m).filter(|&e| MoveCatalogue::on_edge(&moves.spin_edges, e)) {
            let s = c.twice_spin[e];
            // steps of one unit in j keep every vertex parity even
            for next in [s.checked_sub(2), s.checked_add(2)].into_iter().flatten() {
                if next < lo || next > hi {
                    continue;
                }
                let mut d = c.clone();
                d.twice_spin[e] = next;
                if admissible(&d) {
                    out.push((d, e));
                }
            }
        }
    }
    if moves.enabled(MoveKind::HelicityFlip) {
        for e in (0..m).filter(|&e| MoveCatalogue::on_edge(&moves.helicity_edges, e)) {
            let mut d = c.clone();
            d.helicity[e] = d.helicity[e].flipped();
            out.push((d, e));
        }
    }
    if moves.enabled(MoveKind::Recouple) {
        for e in (0..m).filter(|&e| MoveCatalogue::on_edge(&moves.recouple_edges, e)) {
            out.extend(recouplings(c, e, moves.spin_window).into_iter().map(|d| (d, e)));
        }
    }
    out
}

/// 2-2 exchange across internal edge `e = (u, v)`: one of `v`'s outer edges
/// swaps places with `u`'s second outer edge, and the internal twice-spin
/// is relabelled over every value admissible at both new vertices.
fn recouplings(c: &SpinNetworkConfig, e: usize, window: (u32, u32)) -> Vec<SpinNetworkConfig> {
    let (u, v) = c.edges[e];
    if u == v {
        return Vec::new();
    }
    let outer = |w: usize| -> Vec<usize> { c.incident(w).into_iter().filter(|&f| f != e).collect() };
    let (ou, ov) = (outer(u), outer(v));
    if ou.len() != 2 || ov.len() != 2 {
        return Vec::new();
    }
    let mut all = vec![e, ou[0], ou[1], ov[0], ov[1]];
    all.sort_unstable();
    all.dedup();
    if all.len() != 5 {
        return Vec::new();
    }
    let (keep_u, moved_u) = (ou[0], ou[1]);
    let mut out = Vec::new();
    for (moved_v, keep_v) in [(ov[0], ov[1]), (ov[1], ov[0])] {
        let mut d = c.clone();
        let rewire = |edge: (usize, usize), from: usize, to: usize| -> (usize, usize) {
            let (a, b) = if edge.0 == from { (to, edge.1) } else { (edge.0, to) };
            (a.min(b), a.max(b))
        };
        d.edges[moved_u] = rewire(c.edges[moved_u], u, v);
        d.edges[moved_v] = rewire(c.edges[moved_v], v, u);
        if !d.is_connected() {
            continue;
        }
        let s = &c.twice_spin;
        for internal in window.0..=window.1 {
            if triad_admissible(s[keep_u], s[moved_v], internal) && triad_admissible(s[keep_v], s[moved_u], internal) {
                let mut t = d.clone();
                t.twice_spin[e] = internal;
                if t != *c && admissible(&t) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// Breadth-first closure of `seed`; moves leaving the first `cap` states are
/// dropped and flagged.
pub fn build_state_space(
    seed: &SpinNetworkConfig,
    moves: &MoveCatalogue,
    cap: usize,
) -> Result<Generator, SpinDynError> {
    if !admissible(seed) {
        return Err(SpinDynError::InadmissibleSeed);
    }
    if cap == 0 {
        return Err(SpinDynError::CapExceeded);
    }
    if cap > MAX_STATES {
        return Err(SpinDynError::InvalidModel(format!("state cap above {MAX_STATES}")));
    }
    moves.validate(seed.edge_count())?;

    let mut states = vec![seed.clone()];
    let mut index = HashMap::from([(seed.clone(), 0usize)]);
    let mut rows: Vec<Vec<(usize, Rate)>> = Vec::new();
    let mut truncated = false;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let here = states[i].clone();
        let mut row: Vec<(usize, Rate)> = Vec::new();
        for (next, edge) in neighbours(&here, moves) {
            let rate = moves.rate(&here, &next, edge);
            let j = match index.get(&next) {
                Some(&j) => j,
                None if states.len() < cap => {
                    let j = states.len();
                    index.insert(next.clone(), j);
                    states.push(next);
                    queue.push_back(j);
                    j
                }
                None => {
                    truncated = true;
                    continue;
                }
            };
            // merge parallel moves reaching the same state
            match row.iter_mut().find(|(k, _)| *k == j) {
                Some((_, r)) => {
                    r.approx += rate.approx;
                    r.exact = match (r.exact.take(), rate.exact) {
                        (Some(a), Some(b)) => Some(a + b),
                        _ => None,
                    };
                }
                None => row.push((j, rate)),
            }
        }
        if rows.len() <= i {
            rows.resize(i + 1, Vec::new());
        }
        rows[i] = row;
    }
    rows.resize(states.len(), Vec::new());
    Ok(Generator {
        states,
        index,
        rows,
        truncated,
    })
}

/// Dense `f64` generator matrix, row `i` holding rates out of state `i`.
pub fn dense_generator(gen: &Generator) -> Vec<Vec<f64>> {
    let n = gen.len();
    let mut q = vec![vec![0.0; n]; n];
    for (i, row) in q.iter_mut().enumerate() {
        for (j, r) in gen.row(i) {
            row[*j] += r.approx;
            row[i] -= r.approx;
        }
    }
    q
}
