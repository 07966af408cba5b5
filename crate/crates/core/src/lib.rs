//! Active learning with multi-armed bandits for distributed experiment design.

mod error;
mod linalg;
pub mod acquisition;
pub mod bandit;
pub mod benchmarks;
pub mod distsim;
pub mod harness;
pub mod seed;
pub mod stats;
pub mod surrogate;

pub use error::{Error, Result};
pub use stats::Sense;
