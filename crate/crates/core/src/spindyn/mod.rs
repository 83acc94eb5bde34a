//! Finite stochastic spin-network dynamics in parametric time.

mod config;
mod density;
mod induced;
mod moves;
mod trajectory;

use thiserror::Error;

use crate::gluing::GlueError;

pub use config::{admissible, edge_cost, triad_admissible, Helicity, SpinNetworkConfig};
pub use density::{
    balance_residual, evolve_density, recurrent_classes, stationary_density, StationaryReport, EVOLVE_TOLERANCE,
    STATIONARY_RESIDUAL,
};
pub use induced::{
    induced_behavior, induced_scenario, Feature, FeatureValue, InducedBehavior, Intervention, KernelRow, NO_HIT,
};
pub use moves::{build_state_space, dense_generator, Generator, MoveCatalogue, MoveKind, Rate, MAX_STATES};
pub use trajectory::{
    empirical_occupancy, envelope_histogram, envelope_overlap, hitting_time, order_statistics, run_seed,
    simulate_trajectory, Estimate, EventPredicate, Histogram, OrderStatistics, Primitive, TrajectorySample,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinDynError {
    #[error("seed configuration is not admissible")]
    InadmissibleSeed,
    #[error("state cap cannot hold the seed")]
    CapExceeded,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("tolerance not met: {0}")]
    Tolerance(String),
    #[error("null space not certified: {0}")]
    NumericalRank(String),
    #[error("histograms use different binning")]
    BinMismatch,
    #[error("kernel error: {0}")]
    KernelNormalization(String),
    #[error("party {party}: no kernel row matches setting {setting} with features [{features}]")]
    KernelNoMatch {
        party: String,
        setting: usize,
        features: String,
    },
    #[error(transparent)]
    Glue(#[from] GlueError),
}
