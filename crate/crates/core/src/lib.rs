//! Fractional optimal control toolkit.

pub mod conditions;
pub mod error;
pub mod expansion;
pub mod fracops;
pub mod model;
pub mod problems;
pub mod solver;

pub use error::{Error, Result, SolveError};
