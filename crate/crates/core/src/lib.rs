//! Simulation of a Ramsey atomic clock run with squeezed collective-spin input states.
//!
//! * [`spin`]: Gaussian collective-spin states and the channels acting on them.
//! * [`dicke`]: exact symmetric-manifold states used to check the Gaussian model.
//! * [`oracle`]: comparison of the shear channel with exact one-axis twisting.
//! * [`sequence`]: pulse sequences, Monte Carlo shots and squeezing estimates.
//! * [`clock`]: cycle-by-cycle clock operation and Allan deviation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clock;
pub mod dicke;
pub mod error;
pub mod fit;
pub mod oracle;
pub mod presets;
pub mod rng;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};
