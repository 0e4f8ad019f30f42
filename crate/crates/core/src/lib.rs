//! Lipschitz-certified signal temporal logic robustness, time-varying
//! control barrier functions synthesized around a single expert
//! demonstration, and a reactive grid-world harness that drives a unicycle
//! through the resulting safety filter.

pub mod barrier;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod signal;
pub mod stl;
pub mod world;

pub use error::{Error, Result};
pub use signal::{signal_difference, weighted_norm, Clamped, Signal, WeightMatrix};
