//! Overlapping Allan deviation of a fractional-frequency record.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};

/// Two-sided coverage of the reported confidence interval (one sigma).
pub const CI_COVERAGE: f64 = 0.682_689_492_137_085_9;

/// Fractional-frequency estimates, one per clock cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyRecord {
    pub y: Vec<f64>,
    /// Spacing of the estimates, s.
    pub t_cycle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllanCurve {
    pub taus: Vec<f64>,
    pub sigma: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    /// Equivalent degrees of freedom used for each interval.
    pub edf: Vec<f64>,
}

impl AllanCurve {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// `sigma * sqrt(tau)` at each point.
    pub fn white_coefficients(&self) -> Vec<f64> {
        self.taus.iter().zip(&self.sigma).map(|(t, s)| s * t.sqrt()).collect()
    }
}

/// Averaging factors 1, 2, 4, ... that fit in a record of `len` points.
pub fn octave_factors(len: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |m| m.checked_mul(2)).take_while(|m| 2 * m <= len).collect()
}

/// Equivalent degrees of freedom of the overlapping estimator for white
/// frequency noise (Howe, Allan and Barnes), with `n` phase points.
fn white_fm_edf(len: usize, m: usize) -> f64 {
    let n = (len + 1) as f64;
    let m = m as f64;
    let edf = (3.0 * (n - 1.0) / (2.0 * m) - 2.0 * (n - 2.0) / n) * 4.0 * m * m / (4.0 * m * m + 5.0);
    edf.max(1.0)
}

/// Overlapping Allan deviation at `tau = m * t_cycle` for each factor `m`.
pub fn allan_deviation(record: &FrequencyRecord, factors: &[usize]) -> Result<AllanCurve> {
    if !(record.t_cycle > 0.0) {
        return Err(invalid("t_cycle", "must be positive"));
    }
    if factors.contains(&0) || factors.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("taus", "averaging factors must be positive and strictly increasing"));
    }
    let len = record.y.len();
    let needed = 2 * factors.last().copied().unwrap_or(1);
    if len < needed {
        return Err(Error::InsufficientData { needed, got: len });
    }
    if record.y.iter().any(|v| !v.is_finite()) {
        return Err(invalid("record", "entries must be finite"));
    }

    // the estimator is offset-invariant; centering keeps the prefix sums small
    let mean = record.y.iter().sum::<f64>() / len as f64;
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(0.0);
    for v in &record.y {
        prefix.push(prefix.last().unwrap() + (v - mean));
    }

    let mut curve = AllanCurve { taus: vec![], sigma: vec![], ci_lo: vec![], ci_hi: vec![], edf: vec![] };
    for &m in factors {
        let terms = len - 2 * m + 1;
        let sum: f64 = (0..terms)
            .map(|j| {
                let d = (prefix[j + 2 * m] - prefix[j + m]) - (prefix[j + m] - prefix[j]);
                d * d
            })
            .sum();
        let avar = sum / (2.0 * (m * m) as f64 * terms as f64);
        let edf = white_fm_edf(len, m);
        let chi = ChiSquared::new(edf).map_err(|e| invalid("edf", e.to_string()))?;
        let tail = 0.5 * (1.0 - CI_COVERAGE);
        curve.taus.push(m as f64 * record.t_cycle);
        curve.sigma.push(avar.sqrt());
        curve.ci_lo.push((avar * edf / chi.inverse_cdf(1.0 - tail)).sqrt());
        curve.ci_hi.push((avar * edf / chi.inverse_cdf(tail)).sqrt());
        curve.edf.push(edf);
    }
    Ok(curve)
}

/// [`allan_deviation`] at averaging times given in seconds; each must be a
/// multiple of the cycle time.
pub fn allan_deviation_at(record: &FrequencyRecord, taus: &[f64]) -> Result<AllanCurve> {
    let factors = taus
        .iter()
        .map(|&tau| {
            let m = (tau / record.t_cycle).round();
            if m < 1.0 || (m * record.t_cycle - tau).abs() > 1e-9 * tau.abs().max(record.t_cycle) {
                Err(invalid("taus", format!("{tau} s is not a multiple of the cycle time {} s", record.t_cycle)))
            } else {
                Ok(m as usize)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    allan_deviation(record, &factors)
}
