//! Kripke forcing of causal propositions over the context poset.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::contexts::{ContextError, OrderContextPoset};
use crate::proposition::Proposition;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForcingError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("unknown party `{0}` in precedence atom")]
    UnknownParty(String),
    #[error("precedence atom `{0}<{0}` relates a party to itself")]
    SameParty(String),
}

/// Key of an atomic proposition in the valuation and posedness maps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKey {
    Named(String),
    Prec(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub atom: String,
    pub lower: String,
    pub upper: String,
}

impl fmt::Display for MonotonicityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "`{}` forced at {} but not at {} above it",
            self.atom, self.lower, self.upper
        )
    }
}

/// Context poset plus atomic valuation and posedness.
///
/// Posedness defaults to "everywhere" for any atom without an explicit entry.
#[derive(Debug, Clone)]
pub struct KripkeModel {
    poset: OrderContextPoset,
    valuation: BTreeMap<AtomKey, BTreeSet<usize>>,
    posed: BTreeMap<AtomKey, BTreeSet<usize>>,
}

/// Precedence atoms forced exactly where the context's order contains the pair.
pub fn default_order_valuation(poset: &OrderContextPoset) -> KripkeModel {
    let n = poset.parties().len();
    let mut valuation = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let forced = (0..poset.len())
                .filter(|&c| poset.order(c).precedes(i, j))
                .collect();
            valuation.insert(AtomKey::Prec(i, j), forced);
        }
    }
    KripkeModel {
        poset: poset.clone(),
        valuation,
        posed: BTreeMap::new(),
    }
}

impl KripkeModel {
    /// A model with no atoms at all, not even precedence atoms.
    pub fn empty(poset: OrderContextPoset) -> Self {
        KripkeModel {
            poset,
            valuation: BTreeMap::new(),
            posed: BTreeMap::new(),
        }
    }

    pub fn poset(&self) -> &OrderContextPoset {
        &self.poset
    }

    /// Sets the contexts where `key` is forced. Monotonicity is not enforced
    /// here; see [`check_monotone`].
    pub fn set_forced(&mut self, key: AtomKey, contexts: BTreeSet<usize>) {
        self.valuation.insert(key, contexts);
    }

    pub fn set_posed(&mut self, key: AtomKey, contexts: BTreeSet<usize>) {
        self.posed.insert(key, contexts);
    }

    pub fn forced_at(&self, key: &AtomKey) -> Option<&BTreeSet<usize>> {
        self.valuation.get(key)
    }

    pub fn posed_at(&self, key: &AtomKey) -> Option<&BTreeSet<usize>> {
        self.posed.get(key)
    }

    pub fn atom_keys(&self) -> impl Iterator<Item = &AtomKey> {
        self.valuation.keys()
    }

    pub fn is_known(&self, key: &AtomKey) -> bool {
        self.valuation.contains_key(key) || self.posed.contains_key(key)
    }

    pub fn atom_label(&self, key: &AtomKey) -> String {
        match key {
            AtomKey::Named(n) => n.clone(),
            AtomKey::Prec(i, j) => {
                let p = self.poset.parties();
                format!("{}<{}", p[*i].id, p[*j].id)
            }
        }
    }

    pub fn resolve(&self, leaf: &Proposition) -> Result<AtomKey, ForcingError> {
        let key = match leaf {
            Proposition::Atom(name) => AtomKey::Named(name.clone()),
            Proposition::Prec(a, b) => {
                let find = |id: &str| {
                    self.poset
                        .parties()
                        .iter()
                        .position(|p| p.id == id)
                        .ok_or_else(|| ForcingError::UnknownParty(id.to_string()))
                };
                let (i, j) = (find(a)?, find(b)?);
                if i == j {
                    return Err(ForcingError::SameParty(a.clone()));
                }
                AtomKey::Prec(i, j)
            }
            other => unreachable!("resolve called on non-leaf {other}"),
        };
        if !self.is_known(&key) {
            return Err(ForcingError::UnknownAtom(self.atom_label(&key)));
        }
        Ok(key)
    }

    /// `forced[c]` for every context index `c`.
    pub fn forced_set(&self, phi: &Proposition) -> Result<Vec<bool>, ForcingError> {
        let n = self.poset.len();
        Ok(match phi {
            Proposition::Bottom => vec![false; n],
            Proposition::Atom(_) | Proposition::Prec(..) => {
                let key = self.resolve(phi)?;
                let set = self.valuation.get(&key);
                (0..n)
                    .map(|c| set.is_some_and(|s| s.contains(&c)))
                    .collect()
            }
            Proposition::And(l, r) => {
                let (l, r) = (self.forced_set(l)?, self.forced_set(r)?);
                l.iter().zip(&r).map(|(a, b)| *a && *b).collect()
            }
            Proposition::Or(l, r) => {
                let (l, r) = (self.forced_set(l)?, self.forced_set(r)?);
                l.iter().zip(&r).map(|(a, b)| *a || *b).collect()
            }
            Proposition::Implies(l, r) => {
                let (l, r) = (self.forced_set(l)?, self.forced_set(r)?);
                (0..n)
                    .map(|c| self.poset.upset_indices(c).all(|d| !l[d] || r[d]))
                    .collect()
            }
        })
    }

    /// Posedness of a compound is the conjunction over its atoms.
    pub fn posed_set(&self, phi: &Proposition) -> Result<Vec<bool>, ForcingError> {
        let n = self.poset.len();
        let mut posed = vec![true; n];
        for leaf in phi.leaves() {
            let key = self.resolve(leaf)?;
            if let Some(set) = self.posed.get(&key) {
                for (c, flag) in posed.iter_mut().enumerate() {
                    *flag &= set.contains(&c);
                }
            }
        }
        Ok(posed)
    }
}

pub fn forces(model: &KripkeModel, c: &str, phi: &Proposition) -> Result<bool, ForcingError> {
    let ci = model.poset.lookup(c)?;
    Ok(model.forced_set(phi)?[ci])
}

/// Undecided (neither `phi` nor `~phi` forced) or not posed at `c`.
pub fn indeterminate_at(model: &KripkeModel, c: &str, phi: &Proposition) -> Result<bool, ForcingError> {
    let ci = model.poset.lookup(c)?;
    Ok(indeterminate_set(model, phi)?[ci])
}

pub(crate) fn indeterminate_set(model: &KripkeModel, phi: &Proposition) -> Result<Vec<bool>, ForcingError> {
    let posed = model.posed_set(phi)?;
    let yes = model.forced_set(phi)?;
    let no = model.forced_set(&Proposition::not(phi.clone()))?;
    Ok((0..posed.len())
        .map(|c| !posed[c] || (!yes[c] && !no[c]))
        .collect())
}

/// Every `(atom, c, d)` with `c <= d`, the atom forced at `c` but not at `d`.
pub fn check_monotone(model: &KripkeModel) -> Vec<MonotonicityViolation> {
    let poset = &model.poset;
    let mut out = Vec::new();
    for (key, forced) in &model.valuation {
        for &c in forced {
            for d in poset.upset_indices(c) {
                if !forced.contains(&d) {
                    out.push(MonotonicityViolation {
                        atom: model.atom_label(key),
                        lower: poset.name(c).to_string(),
                        upper: poset.name(d).to_string(),
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{build_context_poset, make_partial_order, parties, three_context_poset};

    fn phi() -> Proposition {
        Proposition::prec("A", "B")
    }

    #[test]
    fn default_valuation_forces_prec_where_ordered() {
        let m = default_order_valuation(&three_context_poset());
        assert_eq!(m.forced_set(&phi()).unwrap(), vec![false, true, false]);
        assert!(!forces(&m, "c_BA", &phi()).unwrap());
    }

    #[test]
    fn empty_order_forces_nothing() {
        let p = parties(&["A", "B"]);
        let poset =
            build_context_poset(vec![("c".into(), make_partial_order(&p, &Default::default()).unwrap())])
                .unwrap();
        let m = default_order_valuation(&poset);
        assert!(!forces(&m, "c", &phi()).unwrap());
        assert!(!forces(&m, "c", &Proposition::prec("B", "A")).unwrap());
    }

    #[test]
    fn negation_at_opposite_order() {
        let m = default_order_valuation(&three_context_poset());
        assert!(forces(&m, "c_BA", &Proposition::not(phi())).unwrap());
        assert!(!forces(&m, "c_AB", &Proposition::not(phi())).unwrap());
    }

    #[test]
    fn branching_point_decides_neither() {
        let m = default_order_valuation(&three_context_poset());
        assert!(!forces(&m, "c0", &phi()).unwrap());
        assert!(!forces(&m, "c0", &Proposition::not(phi())).unwrap());
        let lem = Proposition::or(phi(), Proposition::not(phi()));
        assert!(!forces(&m, "c0", &lem).unwrap());
        assert!(forces(&m, "c_AB", &lem).unwrap());
    }

    #[test]
    fn negation_matches_direct_clause() {
        // c |- ~phi  iff  no d >= c forces phi
        let m = default_order_valuation(&three_context_poset());
        let fs = m.forced_set(&phi()).unwrap();
        let neg = m.forced_set(&Proposition::not(phi())).unwrap();
        for (c, &got) in neg.iter().enumerate() {
            let direct = m.poset().upset_indices(c).all(|d| !fs[d]);
            assert_eq!(got, direct);
        }
    }

    #[test]
    fn unknown_names() {
        let m = default_order_valuation(&three_context_poset());
        assert!(matches!(
            forces(&m, "nowhere", &phi()),
            Err(ForcingError::Context(ContextError::UnknownContext(_)))
        ));
        assert_eq!(
            forces(&m, "c0", &Proposition::atom("chi")).unwrap_err(),
            ForcingError::UnknownAtom("chi".into())
        );
        assert_eq!(
            forces(&m, "c0", &Proposition::prec("A", "Z")).unwrap_err(),
            ForcingError::UnknownParty("Z".into())
        );
        assert_eq!(
            forces(&m, "c0", &Proposition::prec("A", "A")).unwrap_err(),
            ForcingError::SameParty("A".into())
        );
    }

    #[test]
    fn atom_declared_only_as_posed_is_known() {
        let mut m = default_order_valuation(&three_context_poset());
        m.set_posed(AtomKey::Named("chi".into()), BTreeSet::from([1, 2]));
        assert!(!forces(&m, "c_AB", &Proposition::atom("chi")).unwrap());
    }

    #[test]
    fn monotone_default_model() {
        assert!(check_monotone(&default_order_valuation(&three_context_poset())).is_empty());
    }

    #[test]
    fn atom_only_at_bottom_gives_two_violations() {
        let mut m = default_order_valuation(&three_context_poset());
        m.set_forced(AtomKey::Named("p".into()), BTreeSet::from([0]));
        let v = check_monotone(&m);
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|x| x.atom == "p" && x.lower == "c0"));
        let uppers: BTreeSet<_> = v.iter().map(|x| x.upper.as_str()).collect();
        assert_eq!(uppers, BTreeSet::from(["c_AB", "c_BA"]));
    }

    #[test]
    fn discrete_poset_never_violates() {
        let p = parties(&["A", "B"]);
        let poset = build_context_poset(vec![
            ("x".into(), make_partial_order(&p, &BTreeSet::from([(0, 1)])).unwrap()),
            ("y".into(), make_partial_order(&p, &BTreeSet::from([(1, 0)])).unwrap()),
        ])
        .unwrap();
        let mut m = default_order_valuation(&poset);
        m.set_forced(AtomKey::Named("p".into()), BTreeSet::from([0]));
        m.set_forced(AtomKey::Named("q".into()), BTreeSet::from([1]));
        assert!(check_monotone(&m).is_empty());
    }

    #[test]
    fn indeterminacy() {
        let mut m = default_order_valuation(&three_context_poset());
        assert!(indeterminate_at(&m, "c0", &phi()).unwrap());
        assert!(!indeterminate_at(&m, "c_AB", &phi()).unwrap());
        assert!(!indeterminate_at(&m, "c_BA", &phi()).unwrap());
        // unposed at c_AB: indeterminate even though forced there
        m.set_posed(AtomKey::Prec(0, 1), BTreeSet::from([2]));
        assert!(indeterminate_at(&m, "c_AB", &phi()).unwrap());
        assert!(forces(&m, "c_AB", &phi()).unwrap());
    }

    #[test]
    fn bottom_is_posed_everywhere() {
        let m = default_order_valuation(&three_context_poset());
        assert_eq!(m.posed_set(&Proposition::Bottom).unwrap(), vec![true; 3]);
        assert!(!indeterminate_at(&m, "c0", &Proposition::Bottom).unwrap());
    }
}
