//! WebAssembly bindings for the browser demo.
//!
//! Each operation has a plain Rust form returning a serializable struct and
//! a `#[wasm_bindgen]` wrapper that hands the same data to JavaScript as JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use squeezed_clock::clock::{allan_deviation, octave_factors, run_clock, sql_reference, ClockConfig, ClockInput};
use squeezed_clock::fit::crossing_time;
use squeezed_clock::presets;
use squeezed_clock::sequence::{Ensemble, LifetimeScan, PresetKind, PresetParams, ShearParams};
use squeezed_clock::spin::{CollectiveSpinState, NoiseModel};
use wasm_bindgen::prelude::*;

/// Largest record the demo will simulate.
pub const MAX_CYCLES: usize = 200_000;

#[derive(Debug, Clone, Serialize)]
pub struct PresetCurve {
    pub preset: &'static str,
    pub zeta: Vec<f64>,
    /// Hold time at which the curve first reaches 1, if it does on the grid.
    pub lifetime_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LifetimeCurves {
    pub t_ms: Vec<f64>,
    pub curves: Vec<PresetCurve>,
}

/// Moment predictions of the squeezing parameter for the four sequences.
pub fn lifetime_curves(
    delta_omega_hz: f64,
    zeta0: f64,
    t_coh_ms: f64,
    t_max_ms: f64,
    points: usize,
) -> squeezed_clock::Result<LifetimeCurves> {
    if points < 2 || !(t_max_ms > 0.0) {
        return Err(squeezed_clock::Error::InvalidParameter {
            name: "grid",
            reason: "need t_max > 0 and at least two points".into(),
        });
    }
    let t_coh = if t_coh_ms > 0.0 { t_coh_ms * 1e-3 } else { f64::INFINITY };
    let scan = LifetimeScan {
        ensemble: Ensemble { s0: presets::LIFETIME_ATOMS / 2.0, c_in: presets::LIFETIME_C_IN },
        noise: NoiseModel { var_omega: (TAU * delta_omega_hz).powi(2), ..NoiseModel::quiet(t_coh) },
        params: PresetParams::new(ShearParams::calibrated(presets::SHEAR_Q, zeta0, 1.0)?),
        n_shots: 1,
        subtract_readout_var: false,
    };
    let grid: Vec<f64> = (0..points).map(|i| i as f64 * t_max_ms * 1e-3 / (points - 1) as f64).collect();
    let mut curves = Vec::new();
    for kind in PresetKind::ALL {
        let zeta: Vec<f64> = scan.predicted(kind, &grid)?.iter().map(|p| p.zeta).collect();
        let lifetime_ms = if kind.is_squeezed() { crossing_time(&grid, &zeta, 1.0).map(|t| t * 1e3) } else { None };
        curves.push(PresetCurve { preset: kind.name(), zeta, lifetime_ms });
    }
    Ok(LifetimeCurves { t_ms: grid.iter().map(|t| t * 1e3).collect(), curves })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityCurve {
    pub sigma: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AllanCurves {
    pub tau_s: Vec<f64>,
    pub css: StabilityCurve,
    pub squeezed: StabilityCurve,
    pub sql: Vec<f64>,
    pub squeezed_reference: Vec<f64>,
}

/// Simulated Allan deviation of coherent and squeezed clocks with the reference apparatus.
pub fn allan_curves(n_cycles: usize, drift_hz: f64, gain: f64, seed: u64) -> squeezed_clock::Result<AllanCurves> {
    if n_cycles > MAX_CYCLES {
        return Err(squeezed_clock::Error::InvalidParameter {
            name: "n_cycles",
            reason: format!("at most {MAX_CYCLES} in the browser"),
        });
    }
    let configure = |input| {
        let mut c = ClockConfig::reference(input);
        c.n_cycles = n_cycles;
        c.noise.drift.enabled = drift_hz > 0.0;
        c.noise.drift.amplitude = squeezed_clock::clock::DriftAmplitude::FrequencyHz(drift_hz.max(0.0));
        c
    };
    let css = configure(ClockInput::Css { contrast: 1.0 });
    let squeezed = configure(ClockInput::Squeezed {
        c_in: presets::CLOCK_SQUEEZED_C_IN,
        contrast_factor: presets::CLOCK_SHEAR_CONTRAST,
        shear_q: presets::SHEAR_Q,
        gain,
    });
    let factors = octave_factors(n_cycles);
    let curve = |config: &ClockConfig, index| -> squeezed_clock::Result<StabilityCurve> {
        let run = run_clock(config, squeezed_clock::rng::derive_seed(seed, index))?;
        let a = allan_deviation(&run.record, &factors)?;
        Ok(StabilityCurve { sigma: a.sigma, ci_lo: a.ci_lo, ci_hi: a.ci_hi })
    };
    let sql = sql_reference(&css);
    let tau_s: Vec<f64> = factors.iter().map(|&m| m as f64 * css.t_cycle).collect();
    Ok(AllanCurves {
        css: curve(&css, 0)?,
        squeezed: curve(&squeezed, 1)?,
        sql: tau_s.iter().map(|&t| sql.sigma(t)).collect(),
        squeezed_reference: tau_s.iter().map(|&t| sql.scaled_by_gain(gain).sigma(t)).collect(),
        tau_s,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Ellipse {
    /// Principal variances relative to the coherent state.
    pub narrow: f64,
    pub wide: f64,
    /// Orientation of the narrow axis from the `S_z` direction, rad.
    pub angle_rad: f64,
    /// Best squeezing parameter in dB (negative means squeezed).
    pub zeta_db: f64,
    /// One-standard-deviation contour in units of the coherent-state deviation,
    /// as (azimuthal, polar) pairs.
    pub outline: Vec<[f64; 2]>,
}

/// Uncertainty ellipse of an equatorial coherent state after one shear.
pub fn squeezed_ellipse(q: f64, excess_area: f64, contrast_factor: f64) -> squeezed_clock::Result<Ellipse> {
    let s0 = presets::LIFETIME_ATOMS / 2.0;
    let state = CollectiveSpinState::css(s0, PI / 2.0, 0.0, 1.0)?.shear(q, excess_area, contrast_factor)?;
    let unit = state.css_variance();
    let cov = state.cov() / unit;
    let (narrow, wide) = state.principal_variances();
    let zeta = state.min_squeezing_parameter(1.0)?;
    // Cholesky factor maps the unit circle onto the covariance contour
    let l00 = cov[(0, 0)].sqrt();
    let l10 = cov[(1, 0)] / l00;
    let l11 = (cov[(1, 1)] - l10 * l10).max(0.0).sqrt();
    let outline = (0..=96)
        .map(|i| {
            let (s, c) = (TAU * i as f64 / 96.0).sin_cos();
            let z = l00 * c;
            let phi = l10 * c + l11 * s;
            [phi, z]
        })
        .collect();
    Ok(Ellipse {
        narrow: narrow / unit,
        wide: wide / unit,
        angle_rad: state.narrow_axis_angle(),
        zeta_db: 10.0 * zeta.log10(),
        outline,
    })
}

fn to_js<T: Serialize>(result: squeezed_clock::Result<T>) -> Result<String, JsError> {
    let value = result.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = lifetimeCurves)]
pub fn lifetime_curves_js(
    delta_omega_hz: f64,
    zeta0: f64,
    t_coh_ms: f64,
    t_max_ms: f64,
    points: usize,
) -> Result<String, JsError> {
    to_js(lifetime_curves(delta_omega_hz, zeta0, t_coh_ms, t_max_ms, points))
}

#[wasm_bindgen(js_name = allanCurves)]
pub fn allan_curves_js(n_cycles: usize, drift_hz: f64, gain: f64, seed: u32) -> Result<String, JsError> {
    to_js(allan_curves(n_cycles, drift_hz, gain, seed as u64))
}

#[wasm_bindgen(js_name = squeezedEllipse)]
pub fn squeezed_ellipse_js(q: f64, excess_area: f64, contrast_factor: f64) -> Result<String, JsError> {
    to_js(squeezed_ellipse(q, excess_area, contrast_factor))
}
