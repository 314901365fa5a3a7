use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::allan::FrequencyRecord;
use super::drift::OuProcess;
use crate::error::{invalid, Result};
use crate::presets;
use crate::rng::{self, Domain};
use crate::sequence::{preset_sequence, run_single_shot, Ensemble, PresetKind, PresetParams, Sequence, ShearParams};
use crate::spin::NoiseModel;

/// Clamp applied to `S_z / (C s0)` before the phase is inverted.
pub const FRINGE_CLAMP: f64 = 1.0 - 1e-9;

/// Input state of the clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClockInput {
    Css {
        contrast: f64,
    },
    /// Phase-squeezed input. `gain` is the variance reduction of the
    /// projection noise relative to an unsqueezed clock at full contrast;
    /// the shear's excess area is calibrated to deliver it.
    Squeezed {
        c_in: f64,
        contrast_factor: f64,
        shear_q: f64,
        gain: f64,
    },
}

impl ClockInput {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Css { .. } => "css",
            Self::Squeezed { .. } => "squeezed",
        }
    }

    /// Contrast right after state preparation.
    pub fn prepared_contrast(&self) -> f64 {
        match *self {
            Self::Css { contrast } => contrast,
            Self::Squeezed { c_in, contrast_factor, .. } => c_in * contrast_factor,
        }
    }

    /// Squeezing parameter of the prepared state, referenced to its own input contrast.
    pub fn prepared_zeta(&self) -> f64 {
        match *self {
            Self::Css { .. } => 1.0,
            Self::Squeezed { c_in, gain, .. } => c_in / gain,
        }
    }

    fn ensemble(&self, s0: f64) -> Ensemble {
        let c_in = match *self {
            Self::Css { contrast } => contrast,
            Self::Squeezed { c_in, .. } => c_in,
        };
        Ensemble { s0, c_in }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockConfig {
    /// Clock transition angular frequency, rad/s.
    pub omega0: f64,
    /// Ramsey time, s.
    pub t_r: f64,
    /// Cycle time, s.
    pub t_cycle: f64,
    pub n_cycles: usize,
    pub s0: f64,
    pub input: ClockInput,
    pub noise: NoiseModel,
}

impl ClockConfig {
    /// Clock with the reference apparatus parameters and the given input state.
    pub fn reference(input: ClockInput) -> Self {
        let mut noise = NoiseModel::quiet(presets::T_COH);
        noise.drift = super::DriftParams::default();
        Self {
            omega0: presets::RB87_CLOCK_OMEGA,
            t_r: presets::CLOCK_T_R,
            t_cycle: presets::CLOCK_T_CYCLE,
            n_cycles: 20_000,
            s0: presets::CLOCK_ATOMS / 2.0,
            input,
            noise,
        }
    }

    pub fn duty_factor(&self) -> f64 {
        self.t_r / self.t_cycle
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) {
            return Err(invalid("omega0", "must be positive"));
        }
        if !(self.t_r > 0.0) {
            return Err(invalid("t_r", "must be positive"));
        }
        if !(self.t_r <= self.t_cycle) {
            return Err(invalid("t_r", "must not exceed the cycle time"));
        }
        if self.n_cycles < 2 {
            return Err(invalid("n_cycles", "need at least two cycles"));
        }
        if !(self.s0 > 0.0) {
            return Err(invalid("s0", "must be positive"));
        }
        match self.input {
            ClockInput::Css { contrast } if !(contrast > 0.0 && contrast <= 1.0) => {
                return Err(invalid("contrast", "must lie in (0, 1]"));
            }
            ClockInput::Squeezed { c_in, contrast_factor, gain, .. } => {
                if !(c_in > 0.0 && c_in <= 1.0) || !(contrast_factor > 0.0 && contrast_factor <= 1.0) {
                    return Err(invalid("contrast", "input contrast and shear contrast factor must lie in (0, 1]"));
                }
                if !(gain > 0.0) {
                    return Err(invalid("gain", "must be positive"));
                }
            }
            _ => {}
        }
        self.noise.validate()
    }

    /// Ramsey sequence run in every cycle.
    pub fn sequence(&self) -> Result<Sequence> {
        match self.input {
            ClockInput::Css { .. } => {
                let unused = ShearParams { q: 0.0, excess_area: 0.0, contrast_factor: 1.0 };
                preset_sequence(PresetKind::CssRamsey, self.t_r, &PresetParams::new(unused))
            }
            ClockInput::Squeezed { contrast_factor, shear_q, .. } => {
                let shear = ShearParams::calibrated(shear_q, self.input.prepared_zeta(), contrast_factor)?;
                preset_sequence(PresetKind::PhaseSqueezedRamsey, self.t_r, &PresetParams::new(shear))
            }
        }
    }
}

/// Output of [`run_clock`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockRun {
    pub record: FrequencyRecord,
    /// Cycles whose readout fell outside the fringe and was clamped.
    pub fringe_excursions: usize,
}

/// Operate the clock open-loop for `n_cycles` cycles.
///
/// Cycle `k` sees the detuning `white + drift(k t_cycle)`, runs one Ramsey
/// shot and converts the readout into a fractional frequency
/// `asin(S_z / (C s0)) / (omega0 t_r)`. Cycle `k` draws from stream
/// `(master_seed, k)`; the drift has its own stream.
pub fn run_clock(config: &ClockConfig, master_seed: u64) -> Result<ClockRun> {
    config.validate()?;
    let seq = config.sequence()?;
    let ensemble = config.input.ensemble(config.s0);
    let noise = &config.noise;
    let white_sd = noise.var_omega.sqrt();

    let mut drift_rng = rng::stream(master_seed, Domain::Drift, 0);
    let mut drift = noise.drift.enabled.then(|| {
        let sigma = TAU * noise.drift.amplitude_hz(noise.field_coeff);
        OuProcess::new(sigma, noise.drift.tau, config.t_cycle, &mut drift_rng)
    });

    let scale = config.omega0 * config.t_r;
    let mut y = Vec::with_capacity(config.n_cycles);
    let mut fringe_excursions = 0;
    for k in 0..config.n_cycles as u64 {
        let mut rng = rng::stream(master_seed, Domain::ClockCycle, k);
        let mut detuning = white_sd * rng.sample::<f64, _>(StandardNormal);
        if let Some(ou) = drift.as_mut() {
            detuning += ou.value();
            ou.advance(&mut drift_rng);
        }
        let shot = run_single_shot(&seq, &ensemble, noise, detuning, k, &mut rng)?;
        let ratio = shot.sz_sample / (shot.contrast_at_readout * config.s0);
        if ratio.abs() > FRINGE_CLAMP {
            fringe_excursions += 1;
        }
        y.push(ratio.clamp(-FRINGE_CLAMP, FRINGE_CLAMP).asin() / scale);
    }
    Ok(ClockRun { record: FrequencyRecord { y, t_cycle: config.t_cycle }, fringe_excursions })
}

/// Projection-noise limit at full contrast, `sigma(tau) = coefficient / sqrt(tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqlReference {
    /// `sigma * sqrt(tau)`, s^(1/2).
    pub coefficient: f64,
}

impl SqlReference {
    pub fn sigma(&self, tau: f64) -> f64 {
        self.coefficient / tau.sqrt()
    }

    /// Reference line lowered by a variance gain.
    pub fn scaled_by_gain(&self, gain: f64) -> Self {
        Self { coefficient: self.coefficient / gain.sqrt() }
    }
}

/// `sigma(tau) = (1 / (omega0 t_r)) sqrt(1 / (2 s0)) sqrt(t_cycle / tau)`.
pub fn sql_reference(config: &ClockConfig) -> SqlReference {
    let per_shot = (1.0 / (2.0 * config.s0)).sqrt() / (config.omega0 * config.t_r);
    SqlReference { coefficient: per_shot * config.t_cycle.sqrt() }
}
