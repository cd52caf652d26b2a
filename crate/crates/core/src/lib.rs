//! Symbolic dynamics and Markov coding for geodesic flows.

pub mod coding;
pub mod error;
pub mod graph;
pub mod hyperbolic;
pub mod sections;
pub mod sft;
pub mod suspension;
pub mod thermo;

pub use error::{Error, Result};
