//! Classical and quantum transport in the double-pulse kicked rotor.

pub mod analysis;
pub mod classical;
pub mod cli;
pub mod error;
pub mod model;
pub mod quantum;
pub mod wigner;

pub use error::{Error, Result};
