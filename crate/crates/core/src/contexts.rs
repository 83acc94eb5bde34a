//! Definite causal contexts: strict partial orders on a fixed party set and
//! the refinement poset they form.
//!
//! Refinement points upward: `c <= d` when `d` commits to every precedence
//! `c` commits to. Two distinct context names carrying the same relation are
//! kept as separate, mutually incomparable points.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

/// Upper bound on party count for anything that enumerates permutations.
pub const MAX_ENUMERATED_PARTIES: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContextError {
    #[error("precedence pairs form a cycle through party `{0}`")]
    Cycle(String),
    #[error("duplicate party id `{0}`")]
    DuplicateParty(String),
    #[error("party indices must run 0..n in order; `{id}` has index {index}")]
    NonContiguousIndex { id: String, index: usize },
    #[error("pair references party index {0}, which is out of range")]
    InvalidPartyIndex(usize),
    #[error("{count} parties exceed the enumeration cap of {cap}")]
    Size { count: usize, cap: usize },
    #[error("duplicate context name `{0}`")]
    DuplicateName(String),
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("contexts are defined over different party sets")]
    PartyMismatch,
    #[error("empty party list")]
    NoParties,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Party {
    pub id: String,
    pub index: usize,
}

impl Party {
    pub fn new(id: impl Into<String>, index: usize) -> Self {
        Party { id: id.into(), index }
    }
}

/// Builds `Party` values with contiguous indices from a list of ids.
pub fn parties<S: AsRef<str>>(ids: &[S]) -> Vec<Party> {
    ids.iter()
        .enumerate()
        .map(|(i, id)| Party::new(id.as_ref(), i))
        .collect()
}

pub(crate) fn validate_parties(parties: &[Party]) -> Result<(), ContextError> {
    let mut seen = BTreeSet::new();
    for (i, p) in parties.iter().enumerate() {
        if !seen.insert(p.id.as_str()) {
            return Err(ContextError::DuplicateParty(p.id.clone()));
        }
        if p.index != i {
            return Err(ContextError::NonContiguousIndex {
                id: p.id.clone(),
                index: p.index,
            });
        }
    }
    Ok(())
}

/// A strict partial order on parties; `(i, j)` means party `i` precedes party `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CausalOrder {
    parties: Vec<Party>,
    relation: BTreeSet<(usize, usize)>,
}

impl CausalOrder {
    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn relation(&self) -> &BTreeSet<(usize, usize)> {
        &self.relation
    }

    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.relation.contains(&(i, j))
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    pub fn party_index(&self, id: &str) -> Option<usize> {
        self.parties.iter().position(|p| p.id == id)
    }

    /// True when every pair of distinct parties is comparable.
    pub fn is_total(&self) -> bool {
        let n = self.parties.len();
        self.relation.len() == n * (n.saturating_sub(1)) / 2
    }

    /// For a total order, the parties listed first to last.
    pub fn sequence(&self) -> Option<Vec<usize>> {
        if !self.is_total() {
            return None;
        }
        let n = self.parties.len();
        let mut seq: Vec<usize> = (0..n).collect();
        // rank = number of predecessors
        seq.sort_by_key(|&j| self.relation.iter().filter(|(_, b)| *b == j).count());
        Some(seq)
    }

    pub fn is_subrelation_of(&self, other: &CausalOrder) -> bool {
        self.relation.is_subset(&other.relation)
    }

    /// All total orders extending this one, in lexicographic order of sequences.
    pub fn linear_extensions(&self) -> Vec<CausalOrder> {
        (0..self.parties.len())
            .permutations(self.parties.len())
            .filter(|perm| {
                self.relation.iter().all(|&(a, b)| {
                    let pa = perm.iter().position(|&x| x == a);
                    let pb = perm.iter().position(|&x| x == b);
                    pa < pb
                })
            })
            .map(|perm| chain(&self.parties, &perm))
            .collect()
    }
}

impl fmt::Display for CausalOrder {
    /// Covering pairs only, e.g. `A<B, B<C`; the empty order renders as `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let covers: Vec<String> = self
            .relation
            .iter()
            .filter(|&&(a, b)| {
                !self
                    .relation
                    .iter()
                    .any(|&(x, y)| x == a && y != b && self.relation.contains(&(y, b)))
            })
            .map(|&(a, b)| format!("{}<{}", self.parties[a].id, self.parties[b].id))
            .collect();
        if covers.is_empty() {
            write!(f, "-")
        } else {
            write!(f, "{}", covers.join(", "))
        }
    }
}

fn chain(parties: &[Party], sequence: &[usize]) -> CausalOrder {
    let mut relation = BTreeSet::new();
    for (k, &a) in sequence.iter().enumerate() {
        for &b in &sequence[k + 1..] {
            relation.insert((a, b));
        }
    }
    CausalOrder {
        parties: parties.to_vec(),
        relation,
    }
}

/// Transitive closure of `pairs` as a strict partial order.
pub fn make_partial_order(
    parties: &[Party],
    pairs: &BTreeSet<(usize, usize)>,
) -> Result<CausalOrder, ContextError> {
    validate_parties(parties)?;
    let n = parties.len();
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in pairs {
        if a >= n {
            return Err(ContextError::InvalidPartyIndex(a));
        }
        if b >= n {
            return Err(ContextError::InvalidPartyIndex(b));
        }
        reach[a][b] = true;
    }
    // Warshall
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let row_k = reach[k].clone();
                for (cell, via) in reach[i].iter_mut().zip(row_k) {
                    *cell |= via;
                }
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| reach[i][i]) {
        return Err(ContextError::Cycle(parties[i].id.clone()));
    }
    let relation = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| reach[i][j])
        .collect();
    Ok(CausalOrder {
        parties: parties.to_vec(),
        relation,
    })
}

/// Every total order on `parties`, lexicographic in the party sequence.
pub fn enumerate_total_orders(parties: &[Party]) -> Result<Vec<CausalOrder>, ContextError> {
    validate_parties(parties)?;
    if parties.is_empty() {
        return Err(ContextError::NoParties);
    }
    if parties.len() > MAX_ENUMERATED_PARTIES {
        return Err(ContextError::Size {
            count: parties.len(),
            cap: MAX_ENUMERATED_PARTIES,
        });
    }
    Ok((0..parties.len())
        .permutations(parties.len())
        .map(|perm| chain(parties, &perm))
        .collect())
}

#[derive(Debug, Clone)]
pub struct NamedContext {
    pub name: String,
    pub order: CausalOrder,
}

/// Contexts ordered by relation inclusion.
#[derive(Debug, Clone)]
pub struct OrderContextPoset {
    contexts: Vec<NamedContext>,
    index: BTreeMap<String, usize>,
    leq: Vec<Vec<bool>>,
    duplicate_relations: Vec<(String, String)>,
}

impl OrderContextPoset {
    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn contexts(&self) -> &[NamedContext] {
        &self.contexts
    }

    pub fn name(&self, c: usize) -> &str {
        &self.contexts[c].name
    }

    pub fn order(&self, c: usize) -> &CausalOrder {
        &self.contexts[c].order
    }

    pub fn parties(&self) -> &[Party] {
        self.contexts
            .first()
            .map(|c| c.order.parties())
            .unwrap_or(&[])
    }

    pub fn lookup(&self, name: &str) -> Result<usize, ContextError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ContextError::UnknownContext(name.to_string()))
    }

    pub fn leq(&self, c: usize, d: usize) -> bool {
        self.leq[c][d]
    }

    /// Pairs of context names sharing one relation; kept incomparable.
    pub fn duplicate_relations(&self) -> &[(String, String)] {
        &self.duplicate_relations
    }

    /// Context indices `d` with `c <= d`.
    pub fn upset_indices(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&d| self.leq[c][d])
    }

    pub fn is_maximal(&self, c: usize) -> bool {
        self.upset_indices(c).all(|d| d == c)
    }

    /// `(c, d)` with `c < d` and nothing strictly between.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut edges = Vec::new();
        for c in 0..n {
            for d in 0..n {
                if c == d || !self.leq[c][d] {
                    continue;
                }
                let between = (0..n).any(|e| e != c && e != d && self.leq[c][e] && self.leq[e][d]);
                if !between {
                    edges.push((c, d));
                }
            }
        }
        edges
    }

    pub fn is_up_closed(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().all(|&c| self.upset_indices(c).all(|d| set.contains(&d)))
    }

    pub fn up_closure(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.iter().flat_map(|&c| self.upset_indices(c)).collect()
    }
}

pub fn build_context_poset(
    contexts: Vec<(String, CausalOrder)>,
) -> Result<OrderContextPoset, ContextError> {
    let mut index = BTreeMap::new();
    for (i, (name, order)) in contexts.iter().enumerate() {
        if index.insert(name.clone(), i).is_some() {
            return Err(ContextError::DuplicateName(name.clone()));
        }
        if order.parties() != contexts[0].1.parties() {
            return Err(ContextError::PartyMismatch);
        }
    }
    let n = contexts.len();
    let mut leq = vec![vec![false; n]; n];
    let mut duplicate_relations = Vec::new();
    for c in 0..n {
        for d in 0..n {
            let (rc, rd) = (&contexts[c].1, &contexts[d].1);
            if c == d {
                leq[c][d] = true;
            } else if rc.relation() == rd.relation() {
                if c < d {
                    duplicate_relations.push((contexts[c].0.clone(), contexts[d].0.clone()));
                }
            } else {
                leq[c][d] = rc.is_subrelation_of(rd);
            }
        }
    }
    Ok(OrderContextPoset {
        contexts: contexts
            .into_iter()
            .map(|(name, order)| NamedContext { name, order })
            .collect(),
        index,
        leq,
        duplicate_relations,
    })
}

/// Names of all contexts at or above `c`.
pub fn upset(poset: &OrderContextPoset, c: &str) -> Result<BTreeSet<String>, ContextError> {
    let ci = poset.lookup(c)?;
    Ok(poset
        .upset_indices(ci)
        .map(|d| poset.name(d).to_string())
        .collect())
}

#[cfg(test)]
pub(crate) use tests::three_context_poset;
