//! Clock operation and frequency-stability analysis.

mod allan;
mod drift;
mod run;

pub use allan::*;
pub use drift::*;
pub use run::*;
