//! Pulse sequences and Monte Carlo shots.
//!
//! Conventions: optical pumping prepares the spin-down state (polar angle
//! `pi`); a `pi/2` pulse about `+y` brings it to the equator along `-x`,
//! which is the nominal mean-spin axis during free precession. The final
//! Ramsey pulse is applied about `cos(r) y - sin(r) x`, with readout phase
//! `r = pi/2` by default so that a positive detuning gives a positive
//! `S_z` on the mid-fringe.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Rotation3, Unit, Vector2, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{self, Domain};
use crate::spin::{CollectiveSpinState, NoiseModel};

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceStep {
    /// Prepare a coherent spin state at the given angles.
    Pump {
        theta: f64,
        phi: f64,
    },
    Pulse {
        axis: Vector3<f64>,
        angle: f64,
    },
    /// Instantaneous cavity-feedback shear.
    Shear {
        q: f64,
        excess_area: f64,
        contrast_factor: f64,
    },
    Wait {
        duration: f64,
    },
    /// `pi` pulse about the nominal (noise-free) mean-spin direction projected on the equator.
    Echo,
    Readout,
}

/// A validated step list: starts with `Pump`, ends with the only `Readout`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    steps: Vec<SequenceStep>,
}

impl Sequence {
    pub fn new(steps: Vec<SequenceStep>) -> Result<Self> {
        let readouts = steps.iter().filter(|s| matches!(s, SequenceStep::Readout)).count();
        if readouts != 1 || !matches!(steps.last(), Some(SequenceStep::Readout)) {
            return Err(Error::MalformedSequence("expected exactly one terminal Readout".into()));
        }
        if !matches!(steps.first(), Some(SequenceStep::Pump { .. })) {
            return Err(Error::MalformedSequence("sequence must start with Pump".into()));
        }
        for step in &steps {
            if let SequenceStep::Wait { duration } = step {
                if !(*duration >= 0.0) {
                    return Err(Error::NegativeDuration(*duration));
                }
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[SequenceStep] {
        &self.steps
    }

    /// Total free-evolution time.
    pub fn total_wait(&self) -> f64 {
        self.steps.iter().map(|s| if let SequenceStep::Wait { duration } = s { *duration } else { 0.0 }).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    CssRamsey,
    PhaseSqueezedRamsey,
    NumberSqueezedHold,
    EchoRamsey,
}

impl PresetKind {
    pub const ALL: [PresetKind; 4] =
        [Self::CssRamsey, Self::PhaseSqueezedRamsey, Self::NumberSqueezedHold, Self::EchoRamsey];

    pub fn name(self) -> &'static str {
        match self {
            Self::CssRamsey => "css_ramsey",
            Self::PhaseSqueezedRamsey => "phase_squeezed_ramsey",
            Self::NumberSqueezedHold => "number_squeezed_hold",
            Self::EchoRamsey => "echo_ramsey",
        }
    }

    pub fn is_squeezed(self) -> bool {
        self != Self::CssRamsey
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid("preset", format!("unknown sequence kind `{s}`")))
    }
}

/// Shear settings of the squeezing step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearParams {
    pub q: f64,
    pub excess_area: f64,
    pub contrast_factor: f64,
}

impl ShearParams {
    /// Shear `q` with the excess area chosen so that the freshly sheared state
    /// has squeezing parameter `zeta0` (referenced to its pre-shear contrast).
    pub fn calibrated(q: f64, zeta0: f64, contrast_factor: f64) -> Result<Self> {
        let target = zeta0 * contrast_factor * contrast_factor;
        let excess_area = crate::spin::calibrate_excess_area(q, target)?;
        Ok(Self { q, excess_area, contrast_factor })
    }

    /// Angle of the narrow axis right after the shear, in the tangent frame.
    pub fn narrow_axis_angle(&self) -> Result<f64> {
        let probe = CollectiveSpinState::css(1.0, FRAC_PI_2, PI, 1.0)?;
        Ok(probe.shear(self.q, self.excess_area, self.contrast_factor)?.narrow_axis_angle())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    pub shear: ShearParams,
    /// Phase of the final Ramsey pulse relative to the first, rad.
    pub readout_phase: f64,
}

impl PresetParams {
    pub fn new(shear: ShearParams) -> Self {
        Self { shear, readout_phase: FRAC_PI_2 }
    }
}

/// Total spin and initial contrast of the atomic sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub s0: f64,
    pub c_in: f64,
}

const PUMPED: SequenceStep = SequenceStep::Pump { theta: PI, phi: 0.0 };

fn nominal_axis() -> Vector3<f64> {
    -Vector3::x()
}

fn first_pulse() -> SequenceStep {
    SequenceStep::Pulse { axis: Vector3::y(), angle: FRAC_PI_2 }
}

fn final_pulse(readout_phase: f64) -> SequenceStep {
    let (s, c) = readout_phase.sin_cos();
    SequenceStep::Pulse { axis: c * Vector3::y() + s * nominal_axis(), angle: FRAC_PI_2 }
}

/// Rotation about the nominal mean axis that takes the narrow axis from
/// angle `alpha` to angle `target` (tangent-frame angles), reduced to the
/// smallest magnitude using the pi-periodicity of the ellipse.
fn orienting_angle(alpha: f64, target: f64) -> f64 {
    // a right-handed turn by beta about the mean maps tangent angle a -> a - beta
    let beta = (alpha - target).rem_euclid(PI);
    if beta > FRAC_PI_2 {
        beta - PI
    } else {
        beta
    }
}

/// Canonical step list for one of the four measurement sequences.
pub fn preset_sequence(kind: PresetKind, t_r: f64, params: &PresetParams) -> Result<Sequence> {
    if !(t_r >= 0.0) {
        return Err(Error::NegativeDuration(t_r));
    }
    let sh = params.shear;
    let shear = SequenceStep::Shear { q: sh.q, excess_area: sh.excess_area, contrast_factor: sh.contrast_factor };
    let orient = |target: f64| -> Result<SequenceStep> {
        Ok(SequenceStep::Pulse { axis: nominal_axis(), angle: orienting_angle(sh.narrow_axis_angle()?, target) })
    };
    let steps = match kind {
        PresetKind::CssRamsey => vec![
            PUMPED,
            first_pulse(),
            SequenceStep::Wait { duration: t_r },
            final_pulse(params.readout_phase),
            SequenceStep::Readout,
        ],
        PresetKind::PhaseSqueezedRamsey => vec![
            PUMPED,
            first_pulse(),
            shear,
            orient(FRAC_PI_2)?,
            SequenceStep::Wait { duration: t_r },
            final_pulse(params.readout_phase),
            SequenceStep::Readout,
        ],
        PresetKind::NumberSqueezedHold => vec![
            PUMPED,
            first_pulse(),
            shear,
            orient(0.0)?,
            SequenceStep::Wait { duration: t_r },
            SequenceStep::Readout,
        ],
        PresetKind::EchoRamsey => vec![
            PUMPED,
            first_pulse(),
            shear,
            orient(FRAC_PI_2)?,
            SequenceStep::Wait { duration: t_r / 2.0 },
            SequenceStep::Echo,
            SequenceStep::Wait { duration: t_r / 2.0 },
            final_pulse(params.readout_phase),
            SequenceStep::Readout,
        ],
    };
    Sequence::new(steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub sz_sample: f64,
    pub contrast_at_readout: f64,
    pub sampled_detuning: f64,
    pub shot_index: u64,
}

/// Axis of the echo pulse: the nominal mean direction flattened onto the equator.
fn echo_axis(nominal: &Vector3<f64>) -> Result<Vector3<f64>> {
    let flat = Vector3::new(nominal.x, nominal.y, 0.0);
    let norm = flat.norm();
    if norm < 1e-9 {
        return Err(Error::MalformedSequence("echo with the mean spin at a pole".into()));
    }
    Ok(flat / norm)
}

fn rotate_vector(v: &Vector3<f64>, axis: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle) * v
}

/// State right before readout together with the nominal mean direction.
fn propagate(
    seq: &Sequence,
    ensemble: &Ensemble,
    noise: &NoiseModel,
    detuning: f64,
    mut on_map: impl FnMut(StepEffect),
) -> Result<CollectiveSpinState> {
    let mut state: Option<CollectiveSpinState> = None;
    let mut nominal = Vector3::z();
    let mut elapsed = 0.0;
    for step in seq.steps() {
        match step {
            SequenceStep::Pump { theta, phi } => {
                state =
                    Some(CollectiveSpinState::css(ensemble.s0, *theta, *phi, ensemble.c_in)?.with_detuning(detuning));
                let (st, ct) = theta.sin_cos();
                nominal = Vector3::new(st * phi.cos(), st * phi.sin(), ct);
                elapsed = 0.0;
                on_map(StepEffect::Reset);
            }
            SequenceStep::Readout => {}
            _ => {
                let s = state.as_ref().ok_or_else(|| Error::MalformedSequence("step before Pump".into()))?;
                let next = match step {
                    SequenceStep::Pulse { axis, angle } => {
                        let (next, map) = s.rotate_tracked(axis, *angle)?;
                        nominal = rotate_vector(&nominal, axis, *angle);
                        on_map(StepEffect::Linear(map));
                        next
                    }
                    SequenceStep::Echo => {
                        let axis = echo_axis(&nominal)?;
                        let (next, map) = s.rotate_tracked(&axis, PI)?;
                        nominal = rotate_vector(&nominal, &axis, PI);
                        on_map(StepEffect::Linear(map));
                        next
                    }
                    SequenceStep::Shear { q, excess_area, contrast_factor } => {
                        on_map(StepEffect::Linear(Matrix2::new(1.0, 0.0, *q, 1.0)));
                        s.shear(*q, *excess_area, *contrast_factor)?
                    }
                    SequenceStep::Wait { duration } => {
                        on_map(StepEffect::Precess { duration: *duration, sin_theta: s.mean_theta().sin() });
                        let next = noise.decay.apply(&s.precess(*duration)?, elapsed, *duration)?;
                        elapsed += duration;
                        next
                    }
                    SequenceStep::Pump { .. } | SequenceStep::Readout => unreachable!(),
                };
                state = Some(next);
            }
        }
    }
    state.ok_or_else(|| Error::MalformedSequence("no Pump step".into()))
}

enum StepEffect {
    Reset,
    Linear(Matrix2<f64>),
    Precess { duration: f64, sin_theta: f64 },
}

/// Execute one shot with a fixed detuning `detuning` (rad/s) and draw its readout.
pub fn run_single_shot<R: Rng + ?Sized>(
    seq: &Sequence,
    ensemble: &Ensemble,
    noise: &NoiseModel,
    detuning: f64,
    shot_index: u64,
    rng: &mut R,
) -> Result<ShotResult> {
    let state = propagate(seq, ensemble, noise, detuning, |_| {})?;
    Ok(ShotResult {
        sz_sample: state.measure_sz(noise.readout_var, rng)?,
        contrast_at_readout: state.contrast(),
        sampled_detuning: detuning,
        shot_index,
    })
}

/// Monte Carlo ensemble of shots. Each shot draws its detuning from
/// `Normal(0, var_omega)` and its readout from its own stream keyed on
/// `(master_seed, shot_index)`, so the result does not depend on how rayon
/// schedules the work.
pub fn run_shots(
    seq: &Sequence,
    ensemble: &Ensemble,
    noise: &NoiseModel,
    n_shots: usize,
    master_seed: u64,
) -> Result<Vec<ShotResult>> {
    if n_shots == 0 {
        return Err(invalid("n_shots", "must be at least 1"));
    }
    noise.validate()?;
    let sd = noise.var_omega.sqrt();
    (0..n_shots as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(master_seed, Domain::Shot, i);
            let detuning = sd * rng.sample::<f64, _>(StandardNormal);
            run_single_shot(seq, ensemble, noise, detuning, i, &mut rng)
        })
        .collect()
}

/// Ensemble moments at readout without sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPrediction {
    pub state: CollectiveSpinState,
    /// Sensitivity of the tangent-frame mean direction to the detuning, rad per rad/s.
    pub detuning_gain: Vector2<f64>,
    pub sz_mean: f64,
    /// Variance of the readout, including frequency noise and detection noise.
    pub sz_variance: f64,
}

impl MomentPrediction {
    /// Predicted squeezing parameter of the readout signal.
    pub fn zeta(&self, c_in: f64, readout_var_subtracted: f64) -> Result<f64> {
        let c = self.state.contrast();
        if c <= 0.0 {
            return Err(Error::ZeroContrast);
        }
        Ok(2.0 * (self.sz_variance - readout_var_subtracted) * c_in / (self.state.s0() * c * c))
    }
}

/// Propagate ensemble moments through a sequence.
///
/// The frozen per-shot detuning enters linearly: its effect on the mean
/// direction is tracked as a tangent-frame gain vector that precession
/// grows and every pulse or shear maps along with the covariance. An echo
/// therefore cancels it exactly, as in the single-shot picture.
pub fn propagate_moments(seq: &Sequence, ensemble: &Ensemble, noise: &NoiseModel) -> Result<MomentPrediction> {
    noise.validate()?;
    let mut gain = Vector2::zeros();
    let state = propagate(seq, ensemble, noise, 0.0, |effect| match effect {
        StepEffect::Reset => gain = Vector2::zeros(),
        StepEffect::Linear(map) => gain = map * gain,
        StepEffect::Precess { duration, sin_theta } => gain.y += sin_theta * duration,
    })?;
    let spread = noise.var_omega * state.mean_length().powi(2) * gain * gain.transpose();
    let total = state.cov() + spread;
    let sz_variance = state.mean_theta().sin().powi(2) * total[(0, 0)] + noise.readout_var;
    Ok(MomentPrediction { sz_mean: state.sz_mean(), state, detuning_gain: gain, sz_variance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaEstimate {
    pub zeta: f64,
    pub stderr: f64,
    pub contrast: f64,
    pub n: usize,
}

/// Squeezing parameter from the spread of readouts:
/// `2 Var(S_z) c_in / (s0 C^2)` with `C` the mean contrast at readout.
///
/// `readout_var_subtracted` is removed from the sample variance first (pass
/// zero to keep detection noise in). The standard error follows from the
/// chi-squared distribution of a Gaussian sample variance.
pub fn estimate_zeta(results: &[ShotResult], c_in: f64, s0: f64, readout_var_subtracted: f64) -> Result<ZetaEstimate> {
    let n = results.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let contrast = results.iter().map(|r| r.contrast_at_readout).sum::<f64>() / n as f64;
    if contrast <= 0.0 {
        return Err(Error::ZeroContrast);
    }
    let mean = results.iter().map(|r| r.sz_sample).sum::<f64>() / n as f64;
    let var = results.iter().map(|r| (r.sz_sample - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let scale = 2.0 * c_in / (s0 * contrast * contrast);
    Ok(ZetaEstimate {
        zeta: scale * (var - readout_var_subtracted),
        stderr: scale * var * (2.0 / (n - 1) as f64).sqrt(),
        contrast,
        n,
    })
}

/// One point of a squeezing-lifetime curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimePoint {
    pub t_r: f64,
    pub zeta: f64,
    pub stderr: f64,
    pub contrast: f64,
}

/// Settings shared by the points of a lifetime scan.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeScan {
    pub ensemble: Ensemble,
    pub noise: NoiseModel,
    pub params: PresetParams,
    pub n_shots: usize,
    pub subtract_readout_var: bool,
}

impl LifetimeScan {
    fn subtracted(&self) -> f64 {
        if self.subtract_readout_var {
            self.noise.readout_var
        } else {
            0.0
        }
    }

    /// Monte Carlo estimate of the squeezing parameter at each hold time.
    /// Point `i` uses its own seed derived from `(master_seed, i)`.
    pub fn monte_carlo(&self, kind: PresetKind, t_grid: &[f64], master_seed: u64) -> Result<Vec<LifetimePoint>> {
        t_grid
            .iter()
            .enumerate()
            .map(|(i, &t_r)| {
                let seq = preset_sequence(kind, t_r, &self.params)?;
                let seed = rng::derive_seed(master_seed, (kind as u64) << 32 | i as u64);
                let shots = run_shots(&seq, &self.ensemble, &self.noise, self.n_shots, seed)?;
                let est = estimate_zeta(&shots, self.ensemble.c_in, self.ensemble.s0, self.subtracted())?;
                Ok(LifetimePoint { t_r, zeta: est.zeta, stderr: est.stderr, contrast: est.contrast })
            })
            .collect()
    }

    /// Noise-free moment prediction at each hold time.
    pub fn predicted(&self, kind: PresetKind, t_grid: &[f64]) -> Result<Vec<LifetimePoint>> {
        t_grid
            .iter()
            .map(|&t_r| {
                let seq = preset_sequence(kind, t_r, &self.params)?;
                let m = propagate_moments(&seq, &self.ensemble, &self.noise)?;
                let zeta = m.zeta(self.ensemble.c_in, self.subtracted())?;
                Ok(LifetimePoint { t_r, zeta, stderr: 0.0, contrast: m.state.contrast() })
            })
            .collect()
    }
}
