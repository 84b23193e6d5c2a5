//! Exact and numerical tools for unipotent flows on homogeneous spaces.

pub mod chain;
pub mod divergence;
pub mod error;
pub mod flow;
pub mod lie;
pub mod matrix;
pub mod numeric;
pub mod poly;
pub mod report;
pub mod rng;
pub mod sl2;
pub mod suites;

pub use error::{Error, Result};
