//! Definite-order gluability of behaviour tables.

mod behavior;
mod constraints;
mod glue;
mod section;
mod strategies;

use thiserror::Error;

use crate::contexts::ContextError;

pub use behavior::{BehaviorTable, Scenario, MAX_TABLE_ENTRIES};
pub use constraints::{
    is_admissible_in_context, is_compatible_with_order, mass_constraints, order_constraints, SignallingConstraint,
};
pub use glue::{
    causal_fraction, check_global_section, gluable_bound, l1_distance_to_gluable, max_over_order, separating_witness,
    CertificateComponent, GlueVerdict, Witness, MAX_LP_CELLS,
};
pub use section::{verify_section_family, SectionFamily};
pub use strategies::{count_deterministic_strategies, enumerate_deterministic_strategies, MAX_STRATEGIES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlueError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("order {0} is not total")]
    NonTotalOrder(String),
    #[error("no causal orders supplied")]
    NoOrders,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("size cap exceeded: {0}")]
    Size(String),
    #[error("settings {settings:?} sum to {sum}, not 1")]
    Normalization { settings: Vec<usize>, sum: String },
    #[error("negative probability at settings {settings:?}, outcomes {outcomes:?}")]
    NegativeProbability { settings: Vec<usize>, outcomes: Vec<usize> },
    #[error("no table assigned to context `{0}`")]
    MissingContext(String),
    #[error("solver failure: {0}")]
    Solver(String),
}
