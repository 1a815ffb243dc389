//! Finite-alphabet machinery for the successive-refinement source-coding
//! problem with common receiver reconstructions: an exact-input probability
//! engine, Gacs-Korner common randomness, achievable rate-region evaluation
//! and search, the closed-form binary region, and the pruning and agreement
//! operators with their quantitative bounds.

pub mod error;
pub mod gk;
pub mod json;
pub mod probability;
pub mod prune;
pub mod region;
pub mod sampling;

pub use error::{Error, Result};
