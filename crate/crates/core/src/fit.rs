//! Small fitting helpers for lifetime and stability curves.

use crate::error::{invalid, Error, Result};

/// `zeta(t) = zeta0 + rate * t^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticGrowth {
    pub zeta0: f64,
    pub rate: f64,
}

impl QuadraticGrowth {
    pub fn eval(&self, t: f64) -> f64 {
        self.zeta0 + self.rate * t * t
    }

    /// Frequency-noise variance implied by the growth rate, `rate / (2 s0 c_in)`.
    pub fn var_omega(&self, s0: f64, c_in: f64) -> f64 {
        self.rate / (2.0 * s0 * c_in)
    }

    /// Time at which the quadratic term equals the initial value.
    pub fn doubling_time(&self) -> f64 {
        (self.zeta0 / self.rate).sqrt()
    }

    /// Time at which the model reaches `level`.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        let excess = level - self.zeta0;
        (excess >= 0.0 && self.rate > 0.0).then(|| (excess / self.rate).sqrt())
    }
}

/// Weighted least-squares fit of `zeta0 + rate * t^2`; weights are `1 / sigma^2`
/// (all points weigh equally when `sigmas` is empty).
pub fn fit_quadratic_growth(ts: &[f64], zetas: &[f64], sigmas: &[f64]) -> Result<QuadraticGrowth> {
    if ts.len() != zetas.len() || (!sigmas.is_empty() && sigmas.len() != ts.len()) {
        return Err(invalid("fit", "mismatched input lengths"));
    }
    if ts.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: ts.len() });
    }
    let (mut sw, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, (&t, &z)) in ts.iter().zip(zetas).enumerate() {
        let w = match sigmas.get(i) {
            Some(&s) if s > 0.0 => 1.0 / (s * s),
            _ => 1.0,
        };
        let x = t * t;
        sw += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * z;
        sxy += w * x * z;
    }
    let det = sw * sxx - sx * sx;
    if det.abs() <= f64::EPSILON * sw * sxx {
        return Err(invalid("fit", "degenerate time grid"));
    }
    let rate = (sw * sxy - sx * sy) / det;
    let zeta0 = (sy - rate * sx) / sw;
    Ok(QuadraticGrowth { zeta0, rate })
}

/// First upward crossing of `level`, linearly interpolated between samples.
pub fn crossing_time(ts: &[f64], values: &[f64], level: f64) -> Option<f64> {
    ts.windows(2).zip(values.windows(2)).find_map(|(t, v)| {
        if v[0] < level && v[1] >= level {
            Some(t[0] + (level - v[0]) * (t[1] - t[0]) / (v[1] - v[0]))
        } else {
            None
        }
    })
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: xs.len().min(ys.len()) });
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(invalid("loglog_slope", "values must be positive"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
