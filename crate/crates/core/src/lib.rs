//! Photon-counting link toolkit for time-gated SPAD receivers.

pub mod detection;
pub mod error;
pub mod harness;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
