//! Consensual regression aggregation with kernel weights and tuned bandwidths.

pub mod aggregate;
pub mod bandwidth;
pub mod bench;
pub mod error;
pub mod io;
pub mod kernel;
pub mod learners;
pub mod persist;
pub mod simulate;
pub mod tuning;

pub use error::{Error, Result};
