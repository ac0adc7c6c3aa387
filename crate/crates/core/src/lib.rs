//! Exact thresholds, expectation thresholds and certified covers for
//! increasing set systems over small ground sets.
//!
//! Everything that ends up in a certificate is computed in exact rational
//! arithmetic. Floating point appears only in Monte Carlo estimates and as
//! an internal accelerator whose output is always re-checked exactly.

pub mod cover;
pub mod error;
pub mod family;
pub mod fixtures;
pub mod graph;
pub mod lp;
pub mod pipeline;
pub mod random;
pub mod rational;
pub mod singleton;
pub mod solvers;
pub mod star_forest;
pub mod subset;
pub mod sweep;

pub use error::{Error, Result};
pub use family::{IncreasingFamily, Interval, MeasureMode};
pub use graph::{DyadicDecomposition, WeightedGraph};
pub use rational::{Probability, Rational};
pub use subset::{Subset, MAX_EXHAUSTIVE, MAX_GROUND_SET};
pub use sweep::Sweeper;
