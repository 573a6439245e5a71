//! Max K-armed bandit: find a sample close to the largest value any arm can
//! produce, using as few samples as possible.
//!
//! The crate holds the reward model, the Max-CB and unified-arm sampling
//! policies, evaluators for the sample-complexity bounds, the adversarial
//! hypothesis constructions behind the lower bounds, and a seeded Monte-Carlo
//! harness that checks the policies against those bounds.

pub mod adversarial;
pub mod bounds;
pub mod error;
pub mod goldens;
pub mod harness;
pub mod model;
pub mod policies;
pub mod sampling;
pub mod schema;

pub use error::{Error, Result};
