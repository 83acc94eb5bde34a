use std::collections::BTreeMap;

use super::behavior::BehaviorTable;
use super::constraints::is_admissible_in_context;
use super::GlueError;
use crate::contexts::OrderContextPoset;

/// One behaviour table per context of a poset.
#[derive(Debug, Clone)]
pub struct SectionFamily {
    pub poset: OrderContextPoset,
    pub tables: BTreeMap<String, BehaviorTable>,
}

impl SectionFamily {
    pub fn new(poset: OrderContextPoset) -> Self {
        SectionFamily {
            poset,
            tables: BTreeMap::new(),
        }
    }

    pub fn assign(&mut self, context: impl Into<String>, table: BehaviorTable) -> &mut Self {
        self.tables.insert(context.into(), table);
        self
    }

    /// The same table at every context.
    pub fn constant(poset: OrderContextPoset, table: &BehaviorTable) -> Self {
        let tables = poset
            .contexts()
            .iter()
            .map(|c| (c.name.clone(), table.clone()))
            .collect();
        SectionFamily { poset, tables }
    }
}

/// Restriction along refinement is the identity on tables, so comparable
/// contexts must carry equal tables.
pub fn verify_section_family(fam: &SectionFamily) -> Result<bool, GlueError> {
    let poset = &fam.poset;
    let mut tables = Vec::with_capacity(poset.len());
    for c in 0..poset.len() {
        let name = poset.name(c);
        let t = fam
            .tables
            .get(name)
            .ok_or_else(|| GlueError::MissingContext(name.to_string()))?;
        tables.push(t);
    }
    for (c, t) in tables.iter().enumerate() {
        if !is_admissible_in_context(t, poset.order(c))? {
            return Ok(false);
        }
    }
    for c in 0..poset.len() {
        for d in poset.upset_indices(c) {
            if d != c && tables[c] != tables[d] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
