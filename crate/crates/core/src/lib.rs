//! Simulation and analysis of canonical embedded branching processes (CEBP)
//! through their crossing trees.
//!
//! The pipeline runs offspring law ([`offspring`]) to crossing tree
//! ([`tree`]) to sample path ([`simulate`]), and back through crossing-forest
//! extraction and the estimators in [`analysis`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod branching;
pub mod error;
pub mod offspring;
pub mod path;
pub mod rng;
pub mod simulate;
pub mod stats;
pub mod tail;
pub mod tree;
pub mod tree_io;
pub mod verify;

pub use error::{Error, Result};
pub use offspring::{make_offspring, Family, OffspringDistribution};
pub use path::{Origin, SamplePath};
pub use simulate::{simulate, SimulationConfig};
pub use tree::{CrossingTree, DurationMode, Orientation};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
