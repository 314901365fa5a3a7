//! Reference parameters of the rubidium clock experiment being modeled.

use std::f64::consts::TAU;

/// Rubidium-87 ground-state hyperfine splitting, rad/s.
pub const RB87_CLOCK_OMEGA: f64 = TAU * 6.834_682_611e9;
/// Linear field sensitivity of the trapped clock transition, Hz/G.
pub const FIELD_COEFF_HZ_PER_G: f64 = 3.7e3;
/// Contrast decay time, s.
pub const T_COH: f64 = 11e-3;

/// Effective atom number (2 s0) in the lifetime measurements.
pub const LIFETIME_ATOMS: f64 = 3.0e4;
/// Contrast of the unsqueezed state.
pub const LIFETIME_C_IN: f64 = 0.9;
/// RMS shot-to-shot transition-frequency noise, rad/s.
pub const DELTA_OMEGA: f64 = TAU * 1.3;
/// Squeezing parameter right after shearing (about 4 dB).
pub const ZETA0: f64 = 0.4;
/// Default normalized shear strength; the excess area is calibrated from it.
pub const SHEAR_Q: f64 = 3.0;

/// Effective atom number (2 s0) during clock operation.
pub const CLOCK_ATOMS: f64 = 3.5e4;
pub const CLOCK_T_R: f64 = 200e-6;
pub const CLOCK_T_CYCLE: f64 = 9.0;
/// Contrast of the squeezed clock before and after shearing (0.9 * 0.9 = 0.81).
pub const CLOCK_SQUEEZED_C_IN: f64 = 0.9;
pub const CLOCK_SHEAR_CONTRAST: f64 = 0.9;
/// Variance reduction of the squeezed clock relative to the projection limit at full contrast.
pub const CLOCK_SQUEEZING_GAIN: f64 = 2.8;
/// Stationary deviation of the slow magnetic drift, expressed as clock frequency (Hz).
pub const DRIFT_AMPLITUDE_HZ: f64 = 0.7;
/// Correlation time of the slow drift, s.
pub const DRIFT_TAU: f64 = 200.0;
