//! Exact state-vector simulation of pre/post-selected interferometry.

pub mod cli;
pub mod error;
pub mod hilbert;
pub mod optics;
pub mod random;
pub mod scenarios;
pub mod teleport;
pub mod tolerance;
pub mod weakmeas;

pub use error::{Result, SimError};
