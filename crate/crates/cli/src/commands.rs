//! The four experiments. Each writes its tables into an output directory
//! and returns the computed results.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use squeezed_clock::clock::{
    allan_deviation, run_clock, sql_reference, AllanCurve, ClockInput, FrequencyRecord, SqlReference, CI_COVERAGE,
    FRINGE_CLAMP,
};
use squeezed_clock::fit::{crossing_time, fit_quadratic_growth, loglog_slope, QuadraticGrowth};
use squeezed_clock::oracle::{run_suite, OracleReport, Verdict};
use squeezed_clock::rng::{self, Domain};
use squeezed_clock::sequence::{LifetimePoint, PresetKind};

use crate::config::{delta_omega_hz, GridSpec};
use crate::output::{num, opt, write_table, Header};
use crate::{CliError, ExperimentConfig};

/// Model curves are evaluated this many times more densely than the simulation grid.
const MODEL_REFINEMENT: usize = 10;

#[derive(Debug, Clone)]
pub struct PresetCurve {
    pub kind: PresetKind,
    pub simulated: Vec<LifetimePoint>,
    pub model: Vec<LifetimePoint>,
    pub fit: QuadraticGrowth,
    /// `2 zeta(0)` for the coherent state, 1 for the squeezed presets.
    pub crossing_level: f64,
    pub crossing: Option<f64>,
    pub model_crossing: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LifetimeOutput {
    pub curves: Vec<PresetCurve>,
}

impl LifetimeOutput {
    pub fn curve(&self, kind: PresetKind) -> &PresetCurve {
        self.curves.iter().find(|c| c.kind == kind).expect("all presets are simulated")
    }
}

fn crossing_of(points: &[LifetimePoint], level: f64) -> Option<f64> {
    let ts: Vec<f64> = points.iter().map(|p| p.t_r).collect();
    let zs: Vec<f64> = points.iter().map(|p| p.zeta).collect();
    crossing_time(&ts, &zs, level)
}

fn lifetime_rows(curves: &[PresetCurve], pick: fn(&PresetCurve) -> &[LifetimePoint]) -> Vec<Vec<String>> {
    curves
        .iter()
        .flat_map(|c| {
            pick(c)
                .iter()
                .map(move |p| vec![c.kind.name().to_string(), num(p.t_r), num(p.zeta), num(p.stderr), num(p.contrast)])
        })
        .collect()
}

/// Squeezing parameter versus hold time for all four presets.
pub fn lifetime(config: &ExperimentConfig, out: &Path) -> Result<LifetimeOutput, CliError> {
    let lc = &config.lifetime;
    let scan = lc.scan()?;
    let mut curves = Vec::new();
    for kind in PresetKind::ALL {
        let grid = lc.grids.get(kind);
        let simulated = scan.monte_carlo(kind, &grid.values(), config.seed)?;
        let fine = GridSpec { t_max_s: grid.t_max_s, points: (grid.points - 1) * MODEL_REFINEMENT + 1 };
        let model = scan.predicted(kind, &fine.values())?;

        let ts: Vec<f64> = simulated.iter().map(|p| p.t_r).collect();
        let zs: Vec<f64> = simulated.iter().map(|p| p.zeta).collect();
        let sigmas: Vec<f64> = simulated.iter().map(|p| p.stderr).collect();
        let fit = fit_quadratic_growth(&ts, &zs, &sigmas)?;
        let (crossing_level, model_level) =
            if kind.is_squeezed() { (1.0, 1.0) } else { (2.0 * fit.zeta0, 2.0 * model[0].zeta) };
        curves.push(PresetCurve {
            kind,
            crossing: crossing_of(&simulated, crossing_level),
            model_crossing: crossing_of(&model, model_level),
            simulated,
            model,
            fit,
            crossing_level,
        });
    }

    let header = |notes: Vec<String>| Header {
        command: "lifetime",
        config,
        decisions: vec![
            ("zeta_reference_contrast", "input contrast".into()),
            ("zeta_stderr", "gaussian sample variance, var * sqrt(2 / (n - 1))".into()),
            ("readout_variance_subtracted", lc.subtract_readout_var.to_string()),
            ("decay_shape", format!("{:?}", lc.decay_shape).to_lowercase()),
            ("fit", "weighted least squares zeta0 + rate * t_r^2".into()),
        ],
        notes,
    };
    let columns = ["preset", "t_r_s", "zeta", "zeta_stderr", "contrast"];
    write_table(
        out,
        "lifetime.csv",
        &header(vec![format!("monte carlo, {} shots per point", lc.n_shots)]),
        &columns,
        lifetime_rows(&curves, |c| &c.simulated),
    )?;
    write_table(
        out,
        "lifetime_model.csv",
        &header(vec!["moment propagation".into()]),
        &columns,
        lifetime_rows(&curves, |c| &c.model),
    )?;
    let s0 = lc.atoms / 2.0;
    let fit_rows = curves.iter().map(|c| {
        let var = c.fit.var_omega(s0, lc.input_contrast);
        vec![
            c.kind.name().to_string(),
            num(c.fit.zeta0),
            num(var),
            num(delta_omega_hz(var.max(0.0))),
            num(c.crossing_level),
            opt(c.crossing),
            opt(c.model_crossing),
        ]
    });
    write_table(
        out,
        "lifetime_fit.csv",
        &header(vec!["crossing_level is 2 zeta(0) for css_ramsey and 1 otherwise".into()]),
        &[
            "preset",
            "zeta0_fit",
            "var_omega_fit_rad2_per_s2",
            "delta_omega_fit_hz",
            "crossing_level",
            "crossing_s",
            "model_crossing_s",
        ],
        fit_rows,
    )?;
    Ok(LifetimeOutput { curves })
}

#[derive(Debug, Clone)]
pub struct ClockCurve {
    pub input: ClockInput,
    pub curve: AllanCurve,
    pub fringe_excursions: usize,
}

#[derive(Debug, Clone)]
pub struct AllanOutput {
    pub css: ClockCurve,
    pub squeezed: ClockCurve,
    /// Projection-noise limit at full contrast.
    pub sql: SqlReference,
    /// `sql` lowered by the configured squeezing gain.
    pub squeezed_reference: SqlReference,
}

/// Open-loop clock runs with coherent and squeezed input.
pub fn allan(config: &ExperimentConfig, out: &Path) -> Result<AllanOutput, CliError> {
    let cc = &config.clock;
    let css_config = cc.css()?;
    let sq_config = cc.squeezed()?;
    let factors = cc.factors();
    let run = |c: &squeezed_clock::clock::ClockConfig, index: u64| -> Result<ClockCurve, CliError> {
        let run = run_clock(c, rng::derive_seed(config.seed, index))?;
        Ok(ClockCurve {
            input: c.input,
            curve: allan_deviation(&run.record, &factors)?,
            fringe_excursions: run.fringe_excursions,
        })
    };
    let (css, squeezed) = rayon::join(|| run(&css_config, 0), || run(&sq_config, 1));
    let (css, squeezed) = (css?, squeezed?);
    let sql = sql_reference(&css_config);
    let squeezed_reference = sql.scaled_by_gain(cc.squeezing_gain);

    let mut rows = Vec::new();
    for c in [&css, &squeezed] {
        for i in 0..c.curve.len() {
            let a = &c.curve;
            rows.push(vec![c.input.name().into(), num(a.taus[i]), num(a.sigma[i]), num(a.ci_lo[i]), num(a.ci_hi[i])]);
        }
    }
    for (name, line) in [("sql_reference", sql), ("squeezed_reference", squeezed_reference)] {
        for &tau in &css.curve.taus {
            let s = num(line.sigma(tau));
            rows.push(vec![name.into(), num(tau), s.clone(), s.clone(), s]);
        }
    }
    let drift = if cc.drift.enabled {
        format!("ornstein-uhlenbeck, {} Hz, tau {} s", cc.drift_hz()?, cc.drift.tau_s)
    } else {
        "disabled".into()
    };
    let header = Header {
        command: "allan",
        config,
        decisions: vec![
            ("allan_estimator", "overlapping".into()),
            ("confidence_interval", format!("chi-square, white-frequency edf, coverage {CI_COVERAGE:.4}")),
            ("drift_model", drift),
            ("phase_estimator", format!("asin, clamp {FRINGE_CLAMP}")),
            ("feedback", "open loop".into()),
            ("decay_shape", format!("{:?}", cc.decay_shape).to_lowercase()),
        ],
        notes: vec![
            format!("sql_coefficient_s_half = {}", num(sql.coefficient)),
            format!("squeezed_reference_coefficient_s_half = {}", num(squeezed_reference.coefficient)),
            format!("fringe_excursions css = {} squeezed = {}", css.fringe_excursions, squeezed.fringe_excursions),
        ],
    };
    write_table(out, "allan.csv", &header, &["input_state", "tau_s", "sigma", "ci_lo", "ci_hi"], rows)?;
    Ok(AllanOutput { css, squeezed, sql, squeezed_reference })
}

/// Gaussian shear against exact one-axis twisting.
pub fn oracle_check(config: &ExperimentConfig, out: &Path) -> Result<OracleReport, CliError> {
    let settings = config.oracle.settings()?;
    let report = run_suite(&settings)?;
    let rows = report.rows.iter().map(|r| {
        let c = &r.comparison;
        let verdict = match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Warn => "warn",
            Verdict::Fail => "fail",
        };
        vec![
            num(c.spin),
            num(c.mu),
            num(c.q_eff),
            num(c.zeta_exact),
            num(c.zeta_gaussian),
            num(c.discrepancy),
            verdict.to_string(),
        ]
    });
    let header = Header {
        command: "oracle-check",
        config,
        decisions: vec![
            ("twisting_map", "q_eff = 2 S mu".into()),
            ("zeta", "minimum over transverse directions, unit contrast".into()),
        ],
        notes: vec![format!("max_discrepancy_linear_regime = {}", num(report.max_discrepancy()))],
    };
    write_table(
        out,
        "oracle.csv",
        &header,
        &["spin", "mu", "q_eff", "zeta_exact", "zeta_gaussian", "discrepancy", "verdict"],
        rows,
    )?;
    Ok(report)
}

/// Fails with a tolerance error when any row in the linear regime is out of tolerance.
pub fn require_oracle_pass(report: &OracleReport) -> Result<(), CliError> {
    if report.passed() {
        Ok(())
    } else {
        let worst = report.rows.iter().filter(|r| r.verdict == Verdict::Fail).count();
        Err(CliError::Tolerance(format!(
            "{worst} oracle comparisons out of tolerance, max discrepancy {:.3e}",
            report.max_discrepancy()
        )))
    }
}

#[derive(Debug, Clone)]
pub struct SelftestOutput {
    pub white: AllanCurve,
    pub random_walk: AllanCurve,
    pub white_slope: f64,
    pub random_walk_slope: f64,
}

fn synthetic(seed: u64, index: u64, n: usize, integrate: bool) -> Vec<f64> {
    let mut rng = rng::stream(seed, Domain::Synthetic, index);
    let mut acc = 0.0;
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            if integrate {
                acc += z;
                acc
            } else {
                z
            }
        })
        .collect()
}

/// Allan slopes of synthetic white and random-walk frequency noise.
pub fn noise_selftest(config: &ExperimentConfig, out: &Path) -> Result<SelftestOutput, CliError> {
    let st = &config.selftest;
    st.validate()?;
    let record = |integrate: bool, index: u64| FrequencyRecord {
        y: synthetic(config.seed, index, st.n_points, integrate),
        t_cycle: st.t0_s,
    };
    let white = allan_deviation(&record(false, 0), &st.white_factors())?;
    let random_walk = allan_deviation(&record(true, 1), &st.random_walk_factors())?;
    let white_slope = loglog_slope(&white.taus, &white.sigma)?;
    let random_walk_slope = loglog_slope(&random_walk.taus, &random_walk.sigma)?;

    let mut rows = Vec::new();
    for (name, c) in [("white", &white), ("random_walk", &random_walk)] {
        for i in 0..c.len() {
            rows.push(vec![name.into(), num(c.taus[i]), num(c.sigma[i]), num(c.ci_lo[i]), num(c.ci_hi[i])]);
        }
    }
    let header = Header {
        command: "noise-selftest",
        config,
        decisions: vec![("allan_estimator", "overlapping".into()), ("slope_fit", "least squares in log-log".into())],
        notes: vec![
            format!("white_slope = {} (expected -0.5)", num(white_slope)),
            format!("random_walk_slope = {} (expected 0.5)", num(random_walk_slope)),
        ],
    };
    write_table(out, "noise_selftest.csv", &header, &["process", "tau_s", "sigma", "ci_lo", "ci_hi"], rows)?;
    Ok(SelftestOutput { white, random_walk, white_slope, random_walk_slope })
}

pub fn require_selftest_pass(config: &ExperimentConfig, result: &SelftestOutput) -> Result<(), CliError> {
    let st = &config.selftest;
    let white_ok = (result.white_slope + 0.5).abs() <= st.white_slope_tolerance;
    let walk_ok = (result.random_walk_slope - 0.5).abs() <= st.random_walk_slope_tolerance;
    if white_ok && walk_ok {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!(
            "slopes white {:.4} (want -0.5 +/- {}), random walk {:.4} (want 0.5 +/- {})",
            result.white_slope, st.white_slope_tolerance, result.random_walk_slope, st.random_walk_slope_tolerance
        )))
    }
}
