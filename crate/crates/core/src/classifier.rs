//! Seven-valued summary of a proposition across a family of contexts.
//!
//! The value is the nonempty subset of {T, F, I}: supported somewhere,
//! refuted somewhere, indeterminate somewhere. It is a meta-level label only;
//! no connectives are defined on it.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::forcing::{indeterminate_set, ForcingError, KripkeModel};
use crate::proposition::Proposition;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("context family is empty")]
    EmptyFamily,
    #[error(transparent)]
    Forcing(#[from] ForcingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SevenValue {
    supported: bool,
    refuted: bool,
    indeterminate: bool,
}

impl SevenValue {
    /// `None` for the empty combination.
    pub fn new(supported: bool, refuted: bool, indeterminate: bool) -> Option<Self> {
        (supported || refuted || indeterminate).then_some(SevenValue {
            supported,
            refuted,
            indeterminate,
        })
    }

    pub fn all() -> [SevenValue; 7] {
        let mut out = Vec::with_capacity(7);
        for bits in 1u8..8 {
            out.push(SevenValue {
                supported: bits & 4 != 0,
                refuted: bits & 2 != 0,
                indeterminate: bits & 1 != 0,
            });
        }
        out.try_into().unwrap()
    }

    pub fn supported(&self) -> bool {
        self.supported
    }

    pub fn refuted(&self) -> bool {
        self.refuted
    }

    pub fn indeterminate(&self) -> bool {
        self.indeterminate
    }

    /// Subset order on {T, F, I}.
    pub fn is_subset_of(&self, other: &SevenValue) -> bool {
        (!self.supported || other.supported)
            && (!self.refuted || other.refuted)
            && (!self.indeterminate || other.indeterminate)
    }
}

impl fmt::Display for SevenValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.supported {
            f.write_str("T")?;
        }
        if self.refuted {
            f.write_str("F")?;
        }
        if self.indeterminate {
            f.write_str("I")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SevenValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SevenValue::all()
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| format!("`{s}` is not one of T, F, TF, I, TI, FI, TFI"))
    }
}

/// One row of a classification report; context lists follow the family order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedRow {
    pub proposition: Proposition,
    pub value: SevenValue,
    pub supporting: Vec<String>,
    pub refuting: Vec<String>,
    pub indeterminate: Vec<String>,
}

fn resolve_family(model: &KripkeModel, family: &[&str]) -> Result<Vec<usize>, ClassifyError> {
    if family.is_empty() {
        return Err(ClassifyError::EmptyFamily);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for name in family {
        let c = model.poset().lookup(name).map_err(ForcingError::from)?;
        if seen.insert(c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn classify_row(
    model: &KripkeModel,
    family: &[usize],
    phi: &Proposition,
) -> Result<ClassifiedRow, ClassifyError> {
    let yes = model.forced_set(phi)?;
    let no = model.forced_set(&Proposition::not(phi.clone()))?;
    let indet = indeterminate_set(model, phi)?;
    let pick = |flags: &[bool]| -> Vec<String> {
        family
            .iter()
            .filter(|&&c| flags[c])
            .map(|&c| model.poset().name(c).to_string())
            .collect()
    };
    let (supporting, refuting, indeterminate) = (pick(&yes), pick(&no), pick(&indet));
    let value = SevenValue::new(
        !supporting.is_empty(),
        !refuting.is_empty(),
        !indeterminate.is_empty(),
    )
    .expect("every context is forced, refuted or indeterminate");
    Ok(ClassifiedRow {
        proposition: phi.clone(),
        value,
        supporting,
        refuting,
        indeterminate,
    })
}

pub fn classify(
    model: &KripkeModel,
    family: &[&str],
    phi: &Proposition,
) -> Result<SevenValue, ClassifyError> {
    let family = resolve_family(model, family)?;
    Ok(classify_row(model, &family, phi)?.value)
}

/// Rows in the order the propositions were given.
pub fn classify_report(
    model: &KripkeModel,
    family: &[&str],
    props: &[Proposition],
) -> Result<Vec<ClassifiedRow>, ClassifyError> {
    let family = resolve_family(model, family)?;
    props
        .iter()
        .map(|phi| classify_row(model, &family, phi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{build_context_poset, make_partial_order, parties};
    use crate::forcing::{default_order_valuation, AtomKey};

    /// c_AB, c_BA and an order-free c_ico on which `A<B` and `B<A` are not posed.
    fn toy_model() -> KripkeModel {
        let p = parties(&["A", "B"]);
        let poset = build_context_poset(vec![
            ("c_AB".into(), make_partial_order(&p, &BTreeSet::from([(0, 1)])).unwrap()),
            ("c_BA".into(), make_partial_order(&p, &BTreeSet::from([(1, 0)])).unwrap()),
            ("c_ico".into(), make_partial_order(&p, &BTreeSet::new()).unwrap()),
        ])
        .unwrap();
        let mut m = default_order_valuation(&poset);
        m.set_posed(AtomKey::Prec(0, 1), BTreeSet::from([0, 1]));
        m.set_posed(AtomKey::Prec(1, 0), BTreeSet::from([0, 1]));
        m
    }

    #[test]
    fn rendering_is_canonical() {
        let names: Vec<String> = SevenValue::all().iter().map(|v| v.to_string()).collect();
        assert_eq!(names, ["I", "F", "FI", "T", "TI", "TF", "TFI"]);
        assert!(SevenValue::new(false, false, false).is_none());
        assert_eq!("TFI".parse::<SevenValue>().unwrap().to_string(), "TFI");
        assert!("IT".parse::<SevenValue>().is_err());
    }

    #[test]
    fn definite_orders_give_tf() {
        let m = toy_model();
        let v = classify(&m, &["c_AB", "c_BA"], &Proposition::prec("A", "B")).unwrap();
        assert_eq!(v.to_string(), "TF");
    }

    #[test]
    fn adding_ico_context_gives_tfi() {
        let m = toy_model();
        let v = classify(&m, &["c_AB", "c_BA", "c_ico"], &Proposition::prec("A", "B")).unwrap();
        assert_eq!(v.to_string(), "TFI");
    }

    #[test]
    fn single_supporting_context() {
        let m = toy_model();
        let v = classify(&m, &["c_AB"], &Proposition::prec("A", "B")).unwrap();
        assert_eq!(v.to_string(), "T");
    }

    #[test]
    fn empty_family_and_unknown_context() {
        let m = toy_model();
        assert_eq!(
            classify(&m, &[], &Proposition::prec("A", "B")).unwrap_err(),
            ClassifyError::EmptyFamily
        );
        assert!(matches!(
            classify(&m, &["zzz"], &Proposition::prec("A", "B")),
            Err(ClassifyError::Forcing(ForcingError::Context(_)))
        ));
    }

    #[test]
    fn report_rows_for_both_orders() {
        let m = toy_model();
        let rows = classify_report(
            &m,
            &["c_AB", "c_BA", "c_ico"],
            &[Proposition::prec("A", "B"), Proposition::prec("B", "A")],
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].value.to_string(), "TFI");
        assert_eq!(rows[0].supporting, vec!["c_AB"]);
        assert_eq!(rows[0].refuting, vec!["c_BA"]);
        assert_eq!(rows[0].indeterminate, vec!["c_ico"]);
        assert_eq!(rows[1].value.to_string(), "TFI");
        assert_eq!(rows[1].supporting, vec!["c_BA"]);
        assert_eq!(rows[1].refuting, vec!["c_AB"]);
    }

    #[test]
    fn empty_proposition_list() {
        let m = toy_model();
        assert!(classify_report(&m, &["c_AB"], &[]).unwrap().is_empty());
    }

    #[test]
    fn bottom_is_refuted_everywhere() {
        let m = toy_model();
        let v = classify(&m, &["c_AB", "c_BA", "c_ico"], &Proposition::Bottom).unwrap();
        assert_eq!(v.to_string(), "F");
    }
}
