//! Design and monitoring toolkit for two-arm randomized trials with a binary
//! endpoint: direction-aware exact tests, conditional-power stopping rules,
//! blinded dual-labeling interim analysis, sample-size calculation and
//! re-estimation, Monte Carlo operating characteristics, and expected
//! sample-size optimal group-sequential designs.

pub mod boundaries;
pub mod design;
pub mod error;
pub mod monitor;
pub mod optimize;
pub mod rng;
mod roots;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
