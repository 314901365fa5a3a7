//! Gaussian shear versus exact one-axis twisting.
//!
//! For an equatorial coherent state of spin `S`, twisting by `exp(-i mu S_z^2)`
//! linearizes to a shear of strength `q_eff = 2 S mu`. The suite compares the
//! best squeezing parameter of the exact state with the Gaussian prediction.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::dicke::{DickeState, MAX_SPIN};
use crate::error::{invalid, Error, Result};
use crate::spin::CollectiveSpinState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub spin: f64,
    pub mu: f64,
    pub q_eff: f64,
    pub zeta_exact: f64,
    pub zeta_gaussian: f64,
    /// `|exact - gaussian| / exact`.
    pub discrepancy: f64,
}

/// Compare the two models at twisting strength `mu`.
pub fn compare_twisting(spin: f64, mu: f64) -> Result<OracleComparison> {
    if spin > MAX_SPIN {
        return Err(Error::SpinTooLarge(spin));
    }
    let exact = DickeState::css(spin, FRAC_PI_2, 0.0)?.evolve_oat(mu).moments().min_squeezing_parameter(1.0)?;
    let q_eff = 2.0 * spin * mu;
    let gaussian =
        CollectiveSpinState::css(spin, FRAC_PI_2, 0.0, 1.0)?.shear(q_eff, 0.0, 1.0)?.min_squeezing_parameter(1.0)?;
    Ok(OracleComparison {
        spin,
        mu,
        q_eff,
        zeta_exact: exact,
        zeta_gaussian: gaussian,
        discrepancy: (exact - gaussian).abs() / exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// Outside tolerance where the linearized model is not expected to hold.
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub comparison: OracleComparison,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub spins: Vec<f64>,
    pub q_eff: Vec<f64>,
    /// Relative tolerance inside the linear regime.
    pub tolerance: f64,
    /// Shears at or above this strength only warn when out of tolerance.
    pub warn_above_q: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            spins: vec![25.0, 50.0, 100.0],
            q_eff: vec![0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 3.0],
            tolerance: 0.05,
            warn_above_q: 1.0 + 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    /// Largest discrepancy among rows in the linear regime.
    pub fn max_discrepancy(&self) -> f64 {
        self.rows.iter().filter(|r| r.verdict != Verdict::Warn).map(|r| r.comparison.discrepancy).fold(0.0, f64::max)
    }
}

pub fn run_suite(settings: &OracleSettings) -> Result<OracleReport> {
    if !(settings.tolerance > 0.0) {
        return Err(invalid("tolerance", "must be positive"));
    }
    let mut rows = Vec::new();
    for &spin in &settings.spins {
        for &q in &settings.q_eff {
            let comparison = compare_twisting(spin, q / (2.0 * spin))?;
            let verdict = if comparison.discrepancy <= settings.tolerance {
                Verdict::Pass
            } else if q >= settings.warn_above_q {
                Verdict::Warn
            } else {
                Verdict::Fail
            };
            rows.push(OracleRow { comparison, verdict });
        }
    }
    Ok(OracleReport { rows })
}
