use squeezed_clock::fit::crossing_time;
use squeezed_clock::presets;
use squeezed_clock::sequence::{Ensemble, LifetimeScan, PresetKind, PresetParams, ShearParams};
use squeezed_clock::spin::NoiseModel;

fn scan(var_omega: f64, n_shots: usize) -> LifetimeScan {
    LifetimeScan {
        ensemble: Ensemble { s0: presets::LIFETIME_ATOMS / 2.0, c_in: presets::LIFETIME_C_IN },
        noise: NoiseModel { var_omega, ..NoiseModel::quiet(presets::T_COH) },
        params: PresetParams::new(ShearParams::calibrated(presets::SHEAR_Q, presets::ZETA0, 1.0).unwrap()),
        n_shots,
        subtract_readout_var: false,
    }
}

#[test]
fn monte_carlo_agrees_with_moments() {
    let s = scan(presets::DELTA_OMEGA.powi(2), 4000);
    let grid = [0.0, 2e-4, 5e-4, 1e-3];
    for kind in PresetKind::ALL {
        let mc = s.monte_carlo(kind, &grid, 11).unwrap();
        let pred = s.predicted(kind, &grid).unwrap();
        for (m, p) in mc.iter().zip(&pred) {
            let z = (m.zeta - p.zeta) / m.stderr;
            assert!(z.abs() < 4.0, "{kind} at {}: {} vs {}", m.t_r, m.zeta, p.zeta);
            assert!((m.contrast - p.contrast).abs() < 1e-12);
        }
    }
}

#[test]
fn echo_curve_ignores_frequency_noise() {
    let grid = [5e-4, 1e-3, 2e-3];
    let quiet = scan(0.0, 1).predicted(PresetKind::EchoRamsey, &grid).unwrap();
    let loud = scan(100.0 * presets::DELTA_OMEGA.powi(2), 1).predicted(PresetKind::EchoRamsey, &grid).unwrap();
    for (a, b) in quiet.iter().zip(&loud) {
        assert!((a.zeta - b.zeta).abs() < 1e-9 * a.zeta);
    }
    assert!(loud[2].zeta < 1.0);
}

fn css_doubling(t_coh: f64) -> f64 {
    let grid: Vec<f64> = (0..40).map(|i| i as f64 * 1e-4).collect();
    let mut s = scan(presets::DELTA_OMEGA.powi(2), 1);
    s.noise.decay.t_coh = t_coh;
    let pred = s.predicted(PresetKind::CssRamsey, &grid).unwrap();
    assert!(pred.windows(2).all(|w| w[1].zeta > w[0].zeta));
    let zetas: Vec<f64> = pred.iter().map(|p| p.zeta).collect();
    crossing_time(&grid, &zetas, 2.0 * zetas[0]).unwrap()
}

#[test]
fn css_curve_grows_monotonically() {
    let analytic =
        (1.0 / (2.0 * presets::LIFETIME_ATOMS / 2.0 * presets::LIFETIME_C_IN * presets::DELTA_OMEGA.powi(2))).sqrt();
    assert!((css_doubling(1e12) / analytic - 1.0).abs() < 0.01);
    let with_decay = css_doubling(presets::T_COH);
    assert!(with_decay < analytic && (with_decay / 700e-6 - 1.0).abs() < 0.15);
}

#[test]
fn number_squeezing_outlives_phase_squeezing() {
    let s = scan(presets::DELTA_OMEGA.powi(2), 1);
    let grid: Vec<f64> = (0..=800).map(|i| i as f64 * 1e-5).collect();
    let life = |kind| {
        let z: Vec<f64> = s.predicted(kind, &grid).unwrap().iter().map(|p| p.zeta).collect();
        crossing_time(&grid, &z, 1.0).unwrap()
    };
    let ratio = life(PresetKind::NumberSqueezedHold) / life(PresetKind::PhaseSqueezedRamsey);
    assert!(ratio > 6.0 && ratio < 10.0, "{ratio}");
}
