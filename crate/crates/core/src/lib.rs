//! Resistance-based graph distances and detection of community merging in
//! a growing two-community stochastic blockmodel.

pub mod check;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod models;
pub mod plot;
pub mod resistance;
pub mod summary;

pub use error::{Error, Result};
pub use graph::{ComponentLabeling, Graph};
pub use resistance::{
    oracle_resistance, rd_distance, renormalize, resistance_matrix, rp_distance, DistanceParams,
    Resistance, ResistanceMatrix,
};
