use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::presets;

/// Size of the slow drift, either directly as clock frequency or as a bias
/// field converted through the field sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftAmplitude {
    FrequencyHz(f64),
    FieldGauss(f64),
}

/// Ornstein-Uhlenbeck drift of the clock frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub enabled: bool,
    pub amplitude: DriftAmplitude,
    /// Correlation time, s.
    pub tau: f64,
}

impl DriftParams {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    /// Stationary deviation in Hz.
    pub fn amplitude_hz(&self, field_coeff_hz_per_g: f64) -> f64 {
        match self.amplitude {
            DriftAmplitude::FrequencyHz(hz) => hz,
            DriftAmplitude::FieldGauss(g) => g * field_coeff_hz_per_g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let amp = match self.amplitude {
            DriftAmplitude::FrequencyHz(x) | DriftAmplitude::FieldGauss(x) => x,
        };
        if !(amp >= 0.0) {
            return Err(invalid("drift amplitude", "must be non-negative"));
        }
        if !(self.tau > 0.0) {
            return Err(invalid("drift tau", "must be positive"));
        }
        Ok(())
    }
}

impl Default for DriftParams {
    fn default() -> Self {
        Self {
            enabled: true,
            amplitude: DriftAmplitude::FrequencyHz(presets::DRIFT_AMPLITUDE_HZ),
            tau: presets::DRIFT_TAU,
        }
    }
}

/// Exact discretization of an OU process sampled every `dt`, started from
/// its stationary distribution. Values are angular frequencies (rad/s).
#[derive(Debug, Clone)]
pub struct OuProcess {
    sigma: f64,
    decay: f64,
    kick: f64,
    value: f64,
}

impl OuProcess {
    pub fn new<R: Rng + ?Sized>(sigma: f64, tau: f64, dt: f64, rng: &mut R) -> Self {
        let decay = (-dt / tau).exp();
        let kick = sigma * (1.0 - decay * decay).sqrt();
        let value = sigma * rng.sample::<f64, _>(StandardNormal);
        Self { sigma, decay, kick, value }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn stationary_deviation(&self) -> f64 {
        self.sigma
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        self.value = self.decay * self.value + self.kick * rng.sample::<f64, _>(StandardNormal);
        self.value
    }
}
