//! Experiment configuration file.
//!
//! Every key is optional; omitted keys take the reference-apparatus values.
//! Physical quantities carry their unit in the key name.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};
use squeezed_clock::clock::{ClockConfig, ClockInput, DriftAmplitude, DriftParams};
use squeezed_clock::oracle::OracleSettings;
use squeezed_clock::presets;
use squeezed_clock::sequence::{Ensemble, LifetimeScan, PresetKind, PresetParams, ShearParams};
use squeezed_clock::spin::{ContrastDecay, DecayShape, NoiseModel};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub lifetime: LifetimeConfig,
    pub clock: ClockSection,
    pub oracle: OracleSection,
    pub selftest: SelftestSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            lifetime: LifetimeConfig::default(),
            clock: ClockSection::default(),
            oracle: OracleSection::default(),
            selftest: SelftestSection::default(),
        }
    }
}

/// Uniform grid `0, t_max_s / (points - 1), ..., t_max_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max_s: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        let step = self.t_max_s / (self.points.max(2) - 1) as f64;
        (0..self.points).map(|i| i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifetimeGrids {
    pub css_ramsey: GridSpec,
    pub phase_squeezed_ramsey: GridSpec,
    pub number_squeezed_hold: GridSpec,
    pub echo_ramsey: GridSpec,
}

impl LifetimeGrids {
    pub fn get(&self, kind: PresetKind) -> GridSpec {
        match kind {
            PresetKind::CssRamsey => self.css_ramsey,
            PresetKind::PhaseSqueezedRamsey => self.phase_squeezed_ramsey,
            PresetKind::NumberSqueezedHold => self.number_squeezed_hold,
            PresetKind::EchoRamsey => self.echo_ramsey,
        }
    }
}

impl Default for LifetimeGrids {
    fn default() -> Self {
        Self {
            css_ramsey: GridSpec { t_max_s: 3e-3, points: 31 },
            phase_squeezed_ramsey: GridSpec { t_max_s: 1.5e-3, points: 31 },
            number_squeezed_hold: GridSpec { t_max_s: 8e-3, points: 41 },
            echo_ramsey: GridSpec { t_max_s: 3e-3, points: 31 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifetimeConfig {
    /// Atom number `2 S0`.
    pub atoms: f64,
    pub input_contrast: f64,
    pub var_omega_rad2_per_s2: f64,
    /// `inf` disables contrast decay.
    pub t_coh_s: f64,
    pub decay_shape: DecayShape,
    pub readout_var_spin2: f64,
    pub subtract_readout_var: bool,
    /// Squeezing parameter right after the shear.
    pub zeta0: f64,
    pub shear_q: f64,
    pub shear_contrast_factor: f64,
    pub readout_phase_rad: f64,
    pub n_shots: usize,
    pub grids: LifetimeGrids,
}

impl Default for LifetimeConfig {
    fn default() -> Self {
        Self {
            atoms: presets::LIFETIME_ATOMS,
            input_contrast: presets::LIFETIME_C_IN,
            var_omega_rad2_per_s2: presets::DELTA_OMEGA.powi(2),
            t_coh_s: presets::T_COH,
            decay_shape: DecayShape::Exponential,
            readout_var_spin2: 0.0,
            subtract_readout_var: true,
            zeta0: presets::ZETA0,
            shear_q: presets::SHEAR_Q,
            shear_contrast_factor: 1.0,
            readout_phase_rad: std::f64::consts::FRAC_PI_2,
            n_shots: 10_000,
            grids: LifetimeGrids::default(),
        }
    }
}

impl LifetimeConfig {
    pub fn scan(&self) -> Result<LifetimeScan, CliError> {
        if self.n_shots < 2 {
            return Err(CliError::config("lifetime.n_shots", "need at least two shots per point"));
        }
        for kind in PresetKind::ALL {
            let g = self.grids.get(kind);
            if g.points < 2 || !(g.t_max_s > 0.0) {
                return Err(CliError::config(
                    format!("lifetime.grids.{}", kind.name()),
                    "need t_max_s > 0 and at least two points",
                ));
            }
        }
        if !(self.atoms > 0.0) {
            return Err(CliError::config("lifetime.atoms", "must be positive"));
        }
        if !(self.input_contrast > 0.0 && self.input_contrast <= 1.0) {
            return Err(CliError::config("lifetime.input_contrast", "must lie in (0, 1]"));
        }
        let noise = NoiseModel {
            var_omega: self.var_omega_rad2_per_s2,
            decay: ContrastDecay { shape: self.decay_shape, t_coh: self.t_coh_s },
            readout_var: self.readout_var_spin2,
            field_coeff: presets::FIELD_COEFF_HZ_PER_G,
            drift: DriftParams::disabled(),
        };
        noise.validate().map_err(|e| CliError::config("lifetime", e))?;
        let shear = ShearParams::calibrated(self.shear_q, self.zeta0, self.shear_contrast_factor)
            .map_err(|e| CliError::config("lifetime.shear_q", e))?;
        let mut params = PresetParams::new(shear);
        params.readout_phase = self.readout_phase_rad;
        Ok(LifetimeScan {
            ensemble: Ensemble { s0: self.atoms / 2.0, c_in: self.input_contrast },
            noise,
            params,
            n_shots: self.n_shots,
            subtract_readout_var: self.subtract_readout_var,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSection {
    pub enabled: bool,
    /// Stationary deviation of the clock frequency. Mutually exclusive with `amplitude_gauss`.
    pub amplitude_hz: Option<f64>,
    /// Stationary deviation of the bias field, converted with `field_coeff_hz_per_g`.
    pub amplitude_gauss: Option<f64>,
    pub tau_s: f64,
}

impl Default for DriftSection {
    fn default() -> Self {
        Self { enabled: true, amplitude_hz: None, amplitude_gauss: None, tau_s: presets::DRIFT_TAU }
    }
}

impl DriftSection {
    fn params(&self) -> Result<DriftParams, CliError> {
        let amplitude = match (self.amplitude_hz, self.amplitude_gauss) {
            (Some(_), Some(_)) => {
                return Err(CliError::config("clock.drift", "set at most one of amplitude_hz and amplitude_gauss"));
            }
            (_, Some(g)) => DriftAmplitude::FieldGauss(g),
            (hz, None) => DriftAmplitude::FrequencyHz(hz.unwrap_or(presets::DRIFT_AMPLITUDE_HZ)),
        };
        let params = DriftParams { enabled: self.enabled, amplitude, tau: self.tau_s };
        params.validate().map_err(|e| CliError::config("clock.drift", e))?;
        Ok(params)
    }

    fn resolve(&mut self) {
        if self.amplitude_gauss.is_none() && self.amplitude_hz.is_none() {
            self.amplitude_hz = Some(presets::DRIFT_AMPLITUDE_HZ);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClockSection {
    pub omega0_rad_per_s: f64,
    pub t_r_s: f64,
    pub t_cycle_s: f64,
    pub n_cycles: usize,
    /// Atom number `2 S0`.
    pub atoms: f64,
    /// White shot-to-shot frequency noise on top of the drift.
    pub var_omega_rad2_per_s2: f64,
    pub t_coh_s: f64,
    pub decay_shape: DecayShape,
    pub readout_var_spin2: f64,
    pub field_coeff_hz_per_g: f64,
    pub css_contrast: f64,
    pub squeezed_input_contrast: f64,
    pub shear_contrast_factor: f64,
    pub shear_q: f64,
    /// Projection-noise variance reduction of the squeezed input.
    pub squeezing_gain: f64,
    pub drift: DriftSection,
}

impl Default for ClockSection {
    fn default() -> Self {
        Self {
            omega0_rad_per_s: presets::RB87_CLOCK_OMEGA,
            t_r_s: presets::CLOCK_T_R,
            t_cycle_s: presets::CLOCK_T_CYCLE,
            n_cycles: 20_000,
            atoms: presets::CLOCK_ATOMS,
            var_omega_rad2_per_s2: 0.0,
            t_coh_s: presets::T_COH,
            decay_shape: DecayShape::Exponential,
            readout_var_spin2: 0.0,
            field_coeff_hz_per_g: presets::FIELD_COEFF_HZ_PER_G,
            css_contrast: 1.0,
            squeezed_input_contrast: presets::CLOCK_SQUEEZED_C_IN,
            shear_contrast_factor: presets::CLOCK_SHEAR_CONTRAST,
            shear_q: presets::SHEAR_Q,
            squeezing_gain: presets::CLOCK_SQUEEZING_GAIN,
            drift: DriftSection::default(),
        }
    }
}

impl ClockSection {
    fn config(&self, input: ClockInput) -> Result<ClockConfig, CliError> {
        let config = ClockConfig {
            omega0: self.omega0_rad_per_s,
            t_r: self.t_r_s,
            t_cycle: self.t_cycle_s,
            n_cycles: self.n_cycles,
            s0: self.atoms / 2.0,
            input,
            noise: NoiseModel {
                var_omega: self.var_omega_rad2_per_s2,
                decay: ContrastDecay { shape: self.decay_shape, t_coh: self.t_coh_s },
                readout_var: self.readout_var_spin2,
                field_coeff: self.field_coeff_hz_per_g,
                drift: self.drift.params()?,
            },
        };
        config.validate().map_err(|e| CliError::config("clock", e))?;
        config.sequence().map_err(|e| CliError::config("clock", e))?;
        Ok(config)
    }

    pub fn css(&self) -> Result<ClockConfig, CliError> {
        self.config(ClockInput::Css { contrast: self.css_contrast })
    }

    pub fn squeezed(&self) -> Result<ClockConfig, CliError> {
        self.config(ClockInput::Squeezed {
            c_in: self.squeezed_input_contrast,
            contrast_factor: self.shear_contrast_factor,
            shear_q: self.shear_q,
            gain: self.squeezing_gain,
        })
    }

    /// Drift amplitude as clock frequency, Hz.
    pub fn drift_hz(&self) -> Result<f64, CliError> {
        Ok(self.drift.params()?.amplitude_hz(self.field_coeff_hz_per_g))
    }

    /// Octave averaging factors that fit the record.
    pub fn factors(&self) -> Vec<usize> {
        squeezed_clock::clock::octave_factors(self.n_cycles)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub spins: Vec<f64>,
    pub q_eff: Vec<f64>,
    pub tolerance: f64,
    /// Shears at or above this strength warn instead of failing.
    pub warn_above_q_eff: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        let d = OracleSettings::default();
        Self { spins: d.spins, q_eff: d.q_eff, tolerance: d.tolerance, warn_above_q_eff: 1.0 + 1e-9 }
    }
}

impl OracleSection {
    pub fn settings(&self) -> Result<OracleSettings, CliError> {
        if self.spins.is_empty() || self.q_eff.is_empty() {
            return Err(CliError::config("oracle", "spins and q_eff must be non-empty"));
        }
        if let Some(s) = self.spins.iter().find(|&&s| !(s > 0.0) || (2.0 * s).fract() != 0.0) {
            return Err(CliError::config("oracle.spins", format!("{s} is not a positive half-integer")));
        }
        if let Some(s) = self.spins.iter().find(|&&s| s > squeezed_clock::dicke::MAX_SPIN) {
            return Err(CliError::config(
                "oracle.spins",
                format!("{s} exceeds the supported maximum {}", squeezed_clock::dicke::MAX_SPIN),
            ));
        }
        if self.q_eff.iter().any(|q| !(*q >= 0.0)) {
            return Err(CliError::config("oracle.q_eff", "must be non-negative"));
        }
        if !(self.tolerance > 0.0) {
            return Err(CliError::config("oracle.tolerance", "must be positive"));
        }
        Ok(OracleSettings {
            spins: self.spins.clone(),
            q_eff: self.q_eff.clone(),
            tolerance: self.tolerance,
            warn_above_q: self.warn_above_q_eff,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestSection {
    pub n_points: usize,
    pub t0_s: f64,
    /// Octave averaging factors `1..=white_max_factor` for the white-noise slope.
    pub white_max_factor: usize,
    /// Octave factors `random_walk_min_factor..=random_walk_max_factor`; the
    /// smallest factors of a sampled random walk sit below the power law.
    pub random_walk_min_factor: usize,
    pub random_walk_max_factor: usize,
    pub white_slope_tolerance: f64,
    pub random_walk_slope_tolerance: f64,
}

impl Default for SelftestSection {
    fn default() -> Self {
        Self {
            n_points: 1 << 16,
            t0_s: 1.0,
            white_max_factor: 64,
            random_walk_min_factor: 4,
            random_walk_max_factor: 256,
            white_slope_tolerance: 0.02,
            random_walk_slope_tolerance: 0.05,
        }
    }
}

fn octaves(lo: usize, hi: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |m| m.checked_mul(2)).take_while(|&m| m <= hi).filter(|&m| m >= lo).collect()
}

impl SelftestSection {
    pub fn white_factors(&self) -> Vec<usize> {
        octaves(1, self.white_max_factor)
    }

    pub fn random_walk_factors(&self) -> Vec<usize> {
        octaves(self.random_walk_min_factor, self.random_walk_max_factor)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let longest = self.white_max_factor.max(self.random_walk_max_factor);
        if self.white_factors().len() < 2 || self.random_walk_factors().len() < 2 {
            return Err(CliError::config("selftest", "each slope needs at least two octave factors"));
        }
        if self.n_points < 4 * longest {
            return Err(CliError::config("selftest.n_points", format!("must be at least {}", 4 * longest)));
        }
        if !(self.t0_s > 0.0) {
            return Err(CliError::config("selftest.t0_s", "must be positive"));
        }
        Ok(())
    }
}

/// Frequency-noise deviation in Hz for a variance in rad^2/s^2.
pub fn delta_omega_hz(var_omega: f64) -> f64 {
    var_omega.sqrt() / TAU
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.clock.drift.resolve();
        Ok(config)
    }

    /// Read `path`, or use the defaults when no file is given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::parse("")?),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text).map_err(|e| match e {
                    CliError::Config(msg) => CliError::Config(format!("{}: {msg}", p.display())),
                    other => other,
                })
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }
}
