//! Gaussian description of a large collective spin.
//!
//! A state is a mean direction on the Bloch sphere, a contrast (mean spin
//! length relative to `s0`) and a 2x2 covariance of the fluctuations in the
//! local tangent frame at the mean direction. The tangent frame is ordered
//! `(dS_z', dS_phi')`: the first axis points along decreasing polar angle,
//! the second along increasing azimuth. On the equator the first axis is
//! `+z`, so `cov[(0, 0)]` is the population-difference variance and
//! `cov[(1, 1)]` the phase variance (in spin units squared).

use nalgebra::{Matrix2, Rotation3, SymmetricEigen, Unit, Vector2, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::clock::DriftParams;
use crate::error::{invalid, Error, Result};

/// Tolerance on the length of a rotation axis.
pub const AXIS_TOLERANCE: f64 = 1e-9;
/// Maximum polar-angle offset from the equator accepted by [`CollectiveSpinState::shear`].
pub const EQUATOR_TOLERANCE: f64 = 1e-6;

const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveSpinState {
    s0: f64,
    mean_theta: f64,
    mean_phi: f64,
    contrast: f64,
    cov: Matrix2<f64>,
    detuning_offset: f64,
}

/// Mean direction and tangent frame `(n, e1, e2)` at polar angle `theta`, azimuth `phi`.
fn frame(theta: f64, phi: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let n = Vector3::new(st * cp, st * sp, ct);
    let e1 = Vector3::new(-ct * cp, -ct * sp, st);
    let e2 = Vector3::new(-sp, cp, 0.0);
    (n, e1, e2)
}

/// `x` shifted by a multiple of 2*pi to lie within pi of `reference`.
fn unwrap_near(x: f64, reference: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    reference + (x - reference + PI).rem_euclid(TAU) - PI
}

fn symmetrize(m: Matrix2<f64>) -> Matrix2<f64> {
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    Matrix2::new(m[(0, 0)], off, off, m[(1, 1)])
}

pub(crate) fn unit_axis(axis: &Vector3<f64>) -> Result<Unit<Vector3<f64>>> {
    let norm = axis.norm();
    if norm < POLE_EPS || !norm.is_finite() {
        return Err(Error::ZeroAxis);
    }
    if (norm - 1.0).abs() > AXIS_TOLERANCE {
        return Err(invalid("axis", format!("not normalized (|axis| = {norm})")));
    }
    Ok(Unit::new_normalize(*axis))
}

impl CollectiveSpinState {
    /// Coherent spin state with transverse variance `contrast * s0 / 2` on both axes.
    pub fn css(s0: f64, theta: f64, phi: f64, contrast: f64) -> Result<Self> {
        let v = contrast * s0 / 2.0;
        Self::new(s0, theta, phi, contrast, Matrix2::new(v, 0.0, 0.0, v))
    }

    pub fn new(s0: f64, theta: f64, phi: f64, contrast: f64, cov: Matrix2<f64>) -> Result<Self> {
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(invalid("s0", format!("must be positive, got {s0}")));
        }
        if !(0.0..=1.0).contains(&contrast) {
            return Err(invalid("contrast", format!("must lie in [0, 1], got {contrast}")));
        }
        if !theta.is_finite() || !phi.is_finite() {
            return Err(invalid("theta/phi", "angles must be finite"));
        }
        if (cov[(0, 1)] - cov[(1, 0)]).abs() > 1e-12 * cov.abs().max().max(1.0)
            || cov[(0, 0)] < 0.0
            || cov[(1, 1)] < 0.0
            || cov.determinant() < -1e-12 * cov.abs().max().powi(2)
        {
            return Err(invalid("cov", "must be symmetric positive semi-definite"));
        }
        Ok(Self { s0, mean_theta: theta, mean_phi: phi, contrast, cov: symmetrize(cov), detuning_offset: 0.0 })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn mean_theta(&self) -> f64 {
        self.mean_theta
    }

    pub fn mean_phi(&self) -> f64 {
        self.mean_phi
    }

    pub fn contrast(&self) -> f64 {
        self.contrast
    }

    pub fn cov(&self) -> &Matrix2<f64> {
        &self.cov
    }

    pub fn detuning_offset(&self) -> f64 {
        self.detuning_offset
    }

    /// Length of the mean spin, `contrast * s0`.
    pub fn mean_length(&self) -> f64 {
        self.contrast * self.s0
    }

    /// Unit vector along the mean spin.
    pub fn mean_direction(&self) -> Vector3<f64> {
        frame(self.mean_theta, self.mean_phi).0
    }

    /// Variance of an unsqueezed state with the current contrast, `contrast * s0 / 2`.
    pub fn css_variance(&self) -> f64 {
        self.contrast * self.s0 / 2.0
    }

    /// Copy of the state carrying the frozen per-shot detuning `omega` (rad/s).
    pub fn with_detuning(&self, omega: f64) -> Self {
        Self { detuning_offset: omega, ..self.clone() }
    }

    /// Rotate the state right-handedly by `angle` about `axis`.
    ///
    /// The mean direction is rotated; the covariance is carried to the new
    /// tangent frame by the orthogonal map between the rotated old frame and
    /// the new one.
    pub fn rotate(&self, axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        self.rotate_tracked(axis, angle).map(|(state, _)| state)
    }

    /// [`rotate`](Self::rotate), also returning the orthogonal map from the old
    /// tangent frame to the new one.
    pub fn rotate_tracked(&self, axis: &Vector3<f64>, angle: f64) -> Result<(Self, Matrix2<f64>)> {
        let axis = unit_axis(axis)?;
        let rot = Rotation3::from_axis_angle(&axis, angle);
        let (n, e1, e2) = frame(self.mean_theta, self.mean_phi);
        let n_new = rot * n;

        let rho = n_new.x.hypot(n_new.y);
        let theta = rho.atan2(n_new.z);
        let phi = if rho < POLE_EPS { self.mean_phi } else { unwrap_near(n_new.y.atan2(n_new.x), self.mean_phi) };

        let (_, f1, f2) = frame(theta, phi);
        let (r1, r2) = (rot * e1, rot * e2);
        let map = Matrix2::new(f1.dot(&r1), f1.dot(&r2), f2.dot(&r1), f2.dot(&r2));
        let cov = symmetrize(map * self.cov * map.transpose());
        Ok((Self { mean_theta: theta, mean_phi: phi, cov, ..self.clone() }, map))
    }

    /// Linear shear about `z`: `dS_phi -> dS_phi + q * dS_z`, plus excess phase
    /// variance `excess_area * v0` and a multiplicative contrast loss.
    ///
    /// `q` is the shear of coordinates normalized to `sqrt(v0)`, with
    /// `v0 = contrast * s0 / 2` evaluated before the shear.
    pub fn shear(&self, q: f64, excess_area: f64, contrast_factor: f64) -> Result<Self> {
        let offset = (self.mean_theta - std::f64::consts::FRAC_PI_2).abs();
        if offset > EQUATOR_TOLERANCE {
            return Err(Error::NotEquatorial { offset });
        }
        if !(excess_area >= 0.0) {
            return Err(invalid("excess_area", format!("must be non-negative, got {excess_area}")));
        }
        if !(contrast_factor > 0.0 && contrast_factor <= 1.0) {
            return Err(invalid("contrast_factor", format!("must lie in (0, 1], got {contrast_factor}")));
        }
        if !q.is_finite() {
            return Err(invalid("q", "must be finite"));
        }
        let v0 = self.css_variance();
        let m = Matrix2::new(1.0, 0.0, q, 1.0);
        let cov = symmetrize(m * self.cov * m.transpose() + Matrix2::new(0.0, 0.0, 0.0, excess_area * v0));
        Ok(Self { cov, contrast: self.contrast * contrast_factor, ..self.clone() })
    }

    /// Metrological squeezing parameter along a tangent-frame direction:
    /// `2 (d^T cov d) c_in / (s0 C^2)`.
    pub fn squeezing_parameter(&self, c_in: f64, direction: &Vector2<f64>) -> Result<f64> {
        if (direction.norm() - 1.0).abs() > AXIS_TOLERANCE {
            return Err(invalid("direction", "must be a unit vector"));
        }
        let var = (direction.transpose() * self.cov * direction)[(0, 0)];
        self.zeta_from_variance(var, c_in)
    }

    /// Squeezing parameter along the narrow axis of the uncertainty ellipse.
    pub fn min_squeezing_parameter(&self, c_in: f64) -> Result<f64> {
        let (narrow, _) = self.principal_variances();
        self.zeta_from_variance(narrow, c_in)
    }

    fn zeta_from_variance(&self, var: f64, c_in: f64) -> Result<f64> {
        if self.contrast <= 0.0 {
            return Err(Error::ZeroContrast);
        }
        Ok(2.0 * var * c_in / (self.s0 * self.contrast * self.contrast))
    }

    /// (narrow, wide) eigenvalues of the covariance.
    pub fn principal_variances(&self) -> (f64, f64) {
        let eig = SymmetricEigen::new(self.cov);
        let (a, b) = (eig.eigenvalues[0], eig.eigenvalues[1]);
        (a.min(b), a.max(b))
    }

    /// Angle of the narrow ellipse axis, measured from the first tangent axis
    /// toward the second, in `(-pi/2, pi/2]`.
    pub fn narrow_axis_angle(&self) -> f64 {
        let (a, b, c) = (self.cov[(0, 0)], self.cov[(0, 1)], self.cov[(1, 1)]);
        // major axis at 0.5*atan2(2b, a-c); the narrow one is perpendicular
        let major = 0.5 * (2.0 * b).atan2(a - c);
        let narrow = major + std::f64::consts::FRAC_PI_2;
        if narrow > std::f64::consts::FRAC_PI_2 {
            narrow - std::f64::consts::PI
        } else {
            narrow
        }
    }

    /// Ensemble-averaged phase diffusion from a static frequency offset with
    /// variance `var_omega`, accumulated over `t`.
    pub fn apply_phase_diffusion(&self, var_omega: f64, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::NegativeDuration(t));
        }
        if !(var_omega >= 0.0) {
            return Err(invalid("var_omega", format!("must be non-negative, got {var_omega}")));
        }
        let mut cov = self.cov;
        cov[(1, 1)] += self.mean_length().powi(2) * var_omega * t * t;
        Ok(Self { cov, ..self.clone() })
    }

    /// Single-shot counterpart of [`apply_phase_diffusion`](Self::apply_phase_diffusion):
    /// precess about `z` by `detuning_offset * t`.
    ///
    /// A rotation about `z` maps the tangent frame onto itself, so only the
    /// azimuth changes.
    pub fn precess(&self, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::NegativeDuration(t));
        }
        Ok(Self { mean_phi: self.mean_phi + self.detuning_offset * t, ..self.clone() })
    }

    /// Exponential contrast decay over `t`; the covariance is untouched.
    pub fn apply_contrast_decay(&self, t: f64, t_coh: f64) -> Result<Self> {
        ContrastDecay { shape: DecayShape::Exponential, t_coh }.apply(self, 0.0, t)
    }

    pub(crate) fn scale_contrast(&self, factor: f64) -> Self {
        Self { contrast: (self.contrast * factor).clamp(0.0, 1.0), ..self.clone() }
    }

    /// Expected `S_z`.
    pub fn sz_mean(&self) -> f64 {
        self.mean_length() * self.mean_theta.cos()
    }

    /// Quantum variance of `S_z`: the first tangent axis projected onto `z`.
    pub fn sz_variance(&self) -> f64 {
        self.mean_theta.sin().powi(2) * self.cov[(0, 0)]
    }

    /// Draw one `S_z` readout with additive detection noise `readout_var`.
    pub fn measure_sz<R: Rng + ?Sized>(&self, readout_var: f64, rng: &mut R) -> Result<f64> {
        if !(readout_var >= 0.0) {
            return Err(invalid("readout_var", format!("must be non-negative, got {readout_var}")));
        }
        let sigma = (self.sz_variance() + readout_var).sqrt();
        let z: f64 = rng.sample(StandardNormal);
        Ok(self.sz_mean() + sigma * z)
    }
}

/// Shape of the single-atom contrast decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DecayShape {
    #[default]
    Exponential,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastDecay {
    pub shape: DecayShape,
    pub t_coh: f64,
}

impl ContrastDecay {
    /// Remaining contrast fraction after total free-evolution time `t`.
    pub fn factor(&self, t: f64) -> f64 {
        let x = t / self.t_coh;
        match self.shape {
            DecayShape::Exponential => (-x).exp(),
            DecayShape::Gaussian => (-x * x).exp(),
        }
    }

    /// Decay for `dt` following `elapsed` seconds of earlier free evolution.
    pub fn apply(&self, state: &CollectiveSpinState, elapsed: f64, dt: f64) -> Result<CollectiveSpinState> {
        if dt < 0.0 {
            return Err(Error::NegativeDuration(dt));
        }
        if !(self.t_coh > 0.0) {
            return Err(invalid("t_coh", format!("must be positive, got {}", self.t_coh)));
        }
        let before = self.factor(elapsed);
        let ratio = if before > 0.0 { self.factor(elapsed + dt) / before } else { 0.0 };
        Ok(state.scale_contrast(ratio))
    }
}

/// Classical noise acting on the clock spin and its readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Shot-to-shot variance of the transition frequency, rad^2/s^2.
    pub var_omega: f64,
    pub decay: ContrastDecay,
    /// Additive variance of one `S_z` readout, spin units squared.
    pub readout_var: f64,
    /// Clock-frequency sensitivity to the bias field, Hz/G.
    pub field_coeff: f64,
    pub drift: DriftParams,
}

impl NoiseModel {
    /// No classical noise at all; contrast still decays with `t_coh`.
    pub fn quiet(t_coh: f64) -> Self {
        Self {
            var_omega: 0.0,
            decay: ContrastDecay { shape: DecayShape::Exponential, t_coh },
            readout_var: 0.0,
            field_coeff: crate::presets::FIELD_COEFF_HZ_PER_G,
            drift: DriftParams::disabled(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.var_omega >= 0.0) {
            return Err(invalid("var_omega", "must be non-negative"));
        }
        if !(self.readout_var >= 0.0) {
            return Err(invalid("readout_var", "must be non-negative"));
        }
        if !(self.decay.t_coh > 0.0) {
            return Err(invalid("t_coh", "must be positive"));
        }
        self.drift.validate()
    }
}

/// Normalized narrow-axis variance of a pure shear of a circular state,
/// the smaller eigenvalue of `[[1, q], [q, 1 + q^2]]`.
pub fn sheared_min_variance(q: f64) -> f64 {
    let q2 = q * q;
    // written as det / larger-root to stay accurate for large q
    let larger = 1.0 + q2 / 2.0 + (q2 + q2 * q2 / 4.0).sqrt();
    1.0 / larger
}

/// Excess area that brings the normalized narrow-axis variance of a shear `q`
/// up to `target`. Fails when the pure shear is already worse than `target`.
pub fn calibrate_excess_area(q: f64, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(invalid("target", format!("normalized variance must lie in (0, 1), got {target}")));
    }
    // eigenvalue `target` of [[1, q], [q, 1 + q^2 + e]]:
    // det = target * trace - target^2 with det = 1 + e, trace = 2 + q^2 + e
    let excess = (target * (2.0 + q * q) - target * target - 1.0) / (1.0 - target);
    if excess < 0.0 {
        return Err(invalid(
            "shear_q",
            format!(
                "shear {q} cannot reach normalized variance {target} (pure shear gives {})",
                sheared_min_variance(q)
            ),
        ));
    }
    Ok(excess)
}
