//! Exact states of the symmetric (Dicke) manifold of `N = 2S` two-level atoms.
//!
//! Used as a brute-force check of the Gaussian model at modest atom number.
//! Amplitudes are indexed by `k = S + m`, `m = -S..=S`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::spin::unit_axis;

/// Largest spin handled by the exact representation.
pub const MAX_SPIN: f64 = 2000.0;

const RESCALE_ABOVE: f64 = 1e150;

#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    spin: f64,
    amps: Vec<Complex64>,
}

/// Number of levels `2S + 1`, validating that `spin` is a supported half-integer.
fn dimension(spin: f64) -> Result<usize> {
    let twice = 2.0 * spin;
    if !(spin >= 0.5) || (twice - twice.round()).abs() > 1e-9 {
        return Err(Error::InvalidSpin(spin));
    }
    if spin > MAX_SPIN {
        return Err(Error::SpinTooLarge(spin));
    }
    Ok(twice.round() as usize + 1)
}

/// `<m+1| J_+ |m>` for `m = k - S`.
fn ladder(two_s: usize, k: usize) -> f64 {
    (((two_s - k) * (k + 1)) as f64).sqrt()
}

impl DickeState {
    /// Coherent spin state with the polar angle measured from the `m = -S`
    /// pole: `amps_m = sqrt(C(2S, S+m)) cos^(S-m)(theta/2) sin^(S+m)(theta/2) e^{-i(S+m)phi}`.
    pub fn css(spin: f64, theta: f64, phi: f64) -> Result<Self> {
        let n = dimension(spin)?;
        let two_s = n - 1;
        let (s, c) = (0.5 * theta).sin_cos();
        let (ls, lc) = (s.abs().ln(), c.abs().ln());
        let amps = (0..n)
            .map(|k| {
                let up = k as i32;
                let down = (two_s - k) as i32;
                // log space keeps C(2S, k) finite at large S; zero powers are exact
                let log_mag = 0.5 * ln_binomial(two_s as u64, k as u64)
                    + if down > 0 { down as f64 * lc } else { 0.0 }
                    + if up > 0 { up as f64 * ls } else { 0.0 };
                let sign = c.signum().powi(down) * s.signum().powi(up);
                Complex64::from_polar(sign * log_mag.exp(), -(k as f64) * phi)
            })
            .collect();
        let mut state = Self { spin, amps };
        state.renormalize();
        Ok(state)
    }

    /// Build from explicit amplitudes (normalized on construction).
    pub fn from_amplitudes(spin: f64, amps: Vec<Complex64>) -> Result<Self> {
        let n = dimension(spin)?;
        if amps.len() != n {
            return Err(crate::error::invalid("amps", format!("expected {n} amplitudes, got {}", amps.len())));
        }
        let mut state = Self { spin, amps };
        if state.norm() == 0.0 {
            return Err(crate::error::invalid("amps", "zero vector"));
        }
        state.renormalize();
        Ok(state)
    }

    fn renormalize(&mut self) {
        let norm = self.norm();
        self.amps.iter_mut().for_each(|a| *a /= norm);
    }

    pub fn spin(&self) -> f64 {
        self.spin
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn m(&self, k: usize) -> f64 {
        k as f64 - self.spin
    }

    /// One-axis twisting `exp(-i mu S_z^2)`.
    pub fn evolve_oat(&self, mu: f64) -> Self {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let m = self.m(k);
                a * Complex64::from_polar(1.0, -mu * m * m)
            })
            .collect();
        Self { spin: self.spin, amps }
    }

    /// Right-handed rotation `exp(-i angle n.J)`.
    pub fn rotate(&self, axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        let n = unit_axis(axis)?;
        let mut out = self.amps.clone();
        Rotation::new(self.amps.len(), &n).apply(angle, &mut out);
        Ok(Self { spin: self.spin, amps: out })
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `[J_x psi, J_y psi, J_z psi]`.
    fn apply_components(&self) -> [Vec<Complex64>; 3] {
        let n = self.amps.len();
        let two_s = n - 1;
        let mut jx = vec![Complex64::ZERO; n];
        let mut jy = vec![Complex64::ZERO; n];
        let jz = (0..n).map(|k| self.amps[k] * self.m(k)).collect();
        for k in 0..n - 1 {
            let c = 0.5 * ladder(two_s, k);
            // J_+ moves amplitude k -> k+1, J_- moves k+1 -> k
            let up = self.amps[k] * c;
            let down = self.amps[k + 1] * c;
            jx[k + 1] += up;
            jx[k] += down;
            jy[k + 1] += up * Complex64::new(0.0, -1.0);
            jy[k] += down * Complex64::new(0.0, 1.0);
        }
        [jx, jy, jz]
    }

    /// Exact first and symmetrized second moments of `(S_x, S_y, S_z)`.
    pub fn moments(&self) -> SpinMoments {
        let applied = self.apply_components();
        let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
        let mean = Vector3::from_fn(|i, _| dot(&self.amps, &applied[i]).re);
        let second = Matrix3::from_fn(|i, j| dot(&applied[i], &applied[j]).re);
        SpinMoments { spin: self.spin, mean, second }
    }
}

/// `exp(-i angle n.J)` for a fixed axis, via the eigenvectors of `n.J`.
///
/// With `n = (rho cos a, rho sin a, n_z)`, `n.J = U T U^dag` where
/// `U = diag(e^{-i a m})` and `T` is real symmetric tridiagonal with exact
/// eigenvalues `-S..=S`. Each eigenvector of `T` comes from the three-term
/// recursion run inward from both ends and matched inside the classically
/// allowed band, which keeps the recursion on its growing solution.
struct Rotation {
    n: usize,
    azimuth: f64,
    nz: f64,
    // eigenvector of eigenvalue j - S in column j, stored row-major by j
    vectors: Option<Vec<Vec<f64>>>,
}

impl Rotation {
    fn new(n: usize, axis: &Vector3<f64>) -> Self {
        let rho = axis.x.hypot(axis.y);
        let azimuth = axis.y.atan2(axis.x);
        let vectors = if rho < 1e-14 {
            None
        } else {
            let two_s = n - 1;
            let spin = two_s as f64 / 2.0;
            let diag: Vec<f64> = (0..n).map(|k| axis.z * (k as f64 - spin)).collect();
            let off: Vec<f64> = (0..n - 1).map(|k| 0.5 * rho * ladder(two_s, k)).collect();
            Some((0..n).map(|j| tridiagonal_eigenvector(&diag, &off, j as f64 - spin)).collect())
        };
        Self { n, azimuth, nz: axis.z, vectors }
    }

    fn apply(&self, angle: f64, psi: &mut [Complex64]) {
        let spin = (self.n - 1) as f64 / 2.0;
        let m = |k: usize| k as f64 - spin;
        match &self.vectors {
            None => {
                for (k, a) in psi.iter_mut().enumerate() {
                    *a *= Complex64::from_polar(1.0, -angle * self.nz * m(k));
                }
            }
            Some(vectors) => {
                // U^dag psi
                for (k, a) in psi.iter_mut().enumerate() {
                    *a *= Complex64::from_polar(1.0, self.azimuth * m(k));
                }
                // coefficients in the eigenbasis, with the eigenphase applied
                let coeffs: Vec<Complex64> = vectors
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let c: Complex64 = v.iter().zip(psi.iter()).map(|(x, a)| a * *x).sum();
                        c * Complex64::from_polar(1.0, -angle * m(j))
                    })
                    .collect();
                psi.iter_mut().for_each(|a| *a = Complex64::ZERO);
                for (v, c) in vectors.iter().zip(&coeffs) {
                    for (a, x) in psi.iter_mut().zip(v) {
                        *a += c * *x;
                    }
                }
                for (k, a) in psi.iter_mut().enumerate() {
                    *a *= Complex64::from_polar(1.0, -self.azimuth * m(k));
                }
            }
        }
    }
}

/// Normalized eigenvector of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (all positive) for the exact eigenvalue `lambda`.
fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let band = |k: usize| {
        let left = if k > 0 { off[k - 1] } else { 0.0 };
        let right = if k + 1 < n { off[k] } else { 0.0 };
        left + right - (lambda - diag[k]).abs()
    };
    let pivot = (0..n).max_by(|&a, &b| band(a).total_cmp(&band(b))).unwrap_or(0);
    let hi = (pivot + 1).min(n - 1);
    let lo = pivot.saturating_sub(1);

    let mut fwd = vec![0.0; hi + 1];
    fwd[0] = 1.0;
    for k in 0..hi {
        let prev = if k > 0 { off[k - 1] * fwd[k - 1] } else { 0.0 };
        fwd[k + 1] = ((lambda - diag[k]) * fwd[k] - prev) / off[k];
        if fwd[k + 1].abs() > RESCALE_ABOVE {
            fwd.iter_mut().for_each(|x| *x /= RESCALE_ABOVE);
        }
    }

    let mut bwd = vec![0.0; n];
    bwd[n - 1] = 1.0;
    for k in (lo + 1..n).rev() {
        let next = if k + 1 < n { off[k] * bwd[k + 1] } else { 0.0 };
        bwd[k - 1] = ((lambda - diag[k]) * bwd[k] - next) / off[k - 1];
        if bwd[k - 1].abs() > RESCALE_ABOVE {
            bwd.iter_mut().for_each(|x| *x /= RESCALE_ABOVE);
        }
    }

    let (num, den) = (lo..=hi).fold((0.0, 0.0), |(num, den), k| (num + fwd[k] * bwd[k], den + bwd[k] * bwd[k]));
    let scale = num / den;
    let mut v: Vec<f64> = (0..n).map(|k| if k <= pivot { fwd[k] } else { scale * bwd[k] }).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Exact spin moments of a Dicke state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMoments {
    pub spin: f64,
    pub mean: Vector3<f64>,
    /// `<(S_i S_j + S_j S_i)/2>`.
    pub second: Matrix3<f64>,
}

impl SpinMoments {
    pub fn covariance(&self) -> Matrix3<f64> {
        self.second - self.mean * self.mean.transpose()
    }

    /// Contrast `|<S>| / S`.
    pub fn contrast(&self) -> f64 {
        self.mean.norm() / self.spin
    }

    /// Covariance in the tangent frame at the mean spin (same frame
    /// convention as [`crate::spin::CollectiveSpinState`]).
    pub fn transverse_covariance(&self) -> Matrix2<f64> {
        let n = self.mean.normalize();
        let theta = n.x.hypot(n.y).atan2(n.z);
        let phi = n.y.atan2(n.x);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let e1 = Vector3::new(-ct * cp, -ct * sp, st);
        let e2 = Vector3::new(-sp, cp, 0.0);
        let cov = self.covariance();
        let proj = |a: &Vector3<f64>, b: &Vector3<f64>| (a.transpose() * cov * b)[(0, 0)];
        let off = proj(&e1, &e2);
        Matrix2::new(proj(&e1, &e1), off, off, proj(&e2, &e2))
    }

    /// Squeezing parameter along the best transverse direction, with `s0 = S`.
    pub fn min_squeezing_parameter(&self, c_in: f64) -> Result<f64> {
        let c = self.contrast();
        if c <= 0.0 {
            return Err(Error::ZeroContrast);
        }
        let eig = SymmetricEigen::new(self.transverse_covariance());
        let narrow = eig.eigenvalues.min();
        Ok(2.0 * narrow * c_in / (self.spin * c * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn generator(spin: f64, axis: &Vector3<f64>) -> DMatrix<Complex64> {
        let n = (2.0 * spin).round() as usize + 1;
        let mut g = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            g[(k, k)] = Complex64::new(axis.z * (k as f64 - spin), 0.0);
            if k + 1 < n {
                let c = 0.5 * ladder(n - 1, k);
                let up = Complex64::new(axis.x * c, -axis.y * c);
                g[(k + 1, k)] = up;
                g[(k, k + 1)] = up.conj();
            }
        }
        g
    }

    fn rotation_matrix(spin: f64, axis: &Vector3<f64>, angle: f64) -> DMatrix<Complex64> {
        let n = (2.0 * spin).round() as usize + 1;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for col in 0..n {
            let mut e = vec![Complex64::ZERO; n];
            e[col] = Complex64::ONE;
            let s = DickeState { spin, amps: e }.rotate(axis, angle).unwrap();
            m.set_column(col, &nalgebra::DVector::from_vec(s.amps));
        }
        m
    }

    #[test]
    fn css_south_pole_and_equator() {
        let s = DickeState::css(3.5, 0.0, 0.7).unwrap();
        assert_relative_eq!(s.amplitudes()[0].norm(), 1.0, epsilon = 1e-14);
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() < 1e-14));

        let h = DickeState::css(0.5, FRAC_PI_2, 0.0).unwrap();
        for a in h.amplitudes() {
            assert_relative_eq!(a.re, 1.0 / 2f64.sqrt(), epsilon = 1e-14);
            assert!(a.im.abs() < 1e-14);
        }
        assert!(DickeState::css(0.0, 0.0, 0.0).is_err());
        assert!(DickeState::css(1.25, 0.0, 0.0).is_err());
        assert!(matches!(DickeState::css(2500.0, 0.0, 0.0), Err(Error::SpinTooLarge(_))));
    }

    #[test]
    fn equatorial_css_moments() {
        let m = DickeState::css(10.0, FRAC_PI_2, 0.0).unwrap().moments();
        assert_relative_eq!(m.mean, Vector3::new(10.0, 0.0, 0.0), epsilon = 1e-10);
        let cov = m.covariance();
        assert_relative_eq!(cov[(2, 2)], 5.0, epsilon = 1e-10);
        assert_relative_eq!(cov[(1, 1)], 5.0, epsilon = 1e-10);
        assert!(cov[(0, 0)].abs() < 1e-9);
        assert_relative_eq!(m.min_squeezing_parameter(1.0).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn large_spin_css_is_normalized() {
        let s = DickeState::css(MAX_SPIN, 1.0, 0.3).unwrap();
        assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-10);
        let m = s.moments();
        // mean along theta measured from the m = -S pole
        assert_relative_eq!(m.mean.z, -MAX_SPIN * 1.0f64.cos(), max_relative = 1e-10);
    }

    #[test]
    fn twisting_spin_half_is_global_phase() {
        let s = DickeState::css(0.5, 1.1, 0.4).unwrap();
        let t = s.evolve_oat(0.9);
        assert_relative_eq!(s.overlap(&t).norm(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.moments().mean, t.moments().mean, epsilon = 1e-14);
    }

    #[test]
    fn twisting_contrast_law() {
        // <S_x> = S cos^(2S-1)(mu), checked against direct summation
        for (spin, mu) in [(5.0, 0.1), (12.5, 0.03), (50.0, 0.02)] {
            let s = DickeState::css(spin, FRAC_PI_2, 0.0).unwrap().evolve_oat(mu);
            let m = s.moments();
            let analytic = spin * mu.cos().powf(2.0 * spin - 1.0);
            assert_relative_eq!(m.mean.x, analytic, max_relative = 1e-10);

            let n = s.amps.len();
            let direct: f64 = (0..n - 1).map(|k| ladder(n - 1, k) * (s.amps[k + 1].conj() * s.amps[k]).re).sum();
            assert_relative_eq!(m.mean.x, direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn twisting_conserves_population_statistics() {
        let s = DickeState::css(50.0, FRAC_PI_2, 0.0).unwrap();
        let t = s.evolve_oat(0.02);
        let (a, b) = (s.moments(), t.moments());
        assert_relative_eq!(a.mean.z, b.mean.z, epsilon = 1e-10);
        assert_relative_eq!(a.covariance()[(2, 2)], b.covariance()[(2, 2)], epsilon = 1e-10);
        assert!(b.min_squeezing_parameter(1.0).unwrap() < 1.0);
        assert_relative_eq!(t.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rotation_basics() {
        let s = DickeState::css(3.0, 0.8, 0.2).unwrap();
        let axis = Vector3::new(0.3, -0.5, 0.81).normalize();
        let same = s.rotate(&axis, 0.0).unwrap();
        assert!(s.amps.iter().zip(&same.amps).all(|(a, b)| (a - b).norm() < 1e-12));

        let back = s.rotate(&axis, 1.3).unwrap().rotate(&axis, -1.3).unwrap();
        let dist: f64 = s.amps.iter().zip(&back.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(dist < 1e-10, "{dist}");

        let south = DickeState::css(4.5, 0.0, 0.0).unwrap();
        let flipped = south.rotate(&Vector3::x(), PI).unwrap();
        assert_relative_eq!(flipped.amps.last().unwrap().norm(), 1.0, epsilon = 1e-10);

        assert_eq!(s.rotate(&Vector3::zeros(), 1.0), Err(Error::ZeroAxis));
    }

    #[test]
    fn rotation_matches_matrix_exponential() {
        let axes = [
            Vector3::x(),
            Vector3::y(),
            Vector3::z(),
            Vector3::new(0.2, 0.7, -0.4).normalize(),
            Vector3::new(-1.0, 0.3, 2.0).normalize(),
        ];
        for spin in [0.5, 1.0, 2.5, 6.0, 10.0] {
            for axis in &axes {
                for angle in [0.37, PI / 2.0, 2.9] {
                    let exact = (generator(spin, axis) * Complex64::new(0.0, -angle)).exp();
                    let ours = rotation_matrix(spin, axis, angle);
                    let err = (&exact - &ours).iter().map(|z| z.norm()).fold(0.0, f64::max);
                    assert!(err < 1e-10, "spin {spin} axis {axis:?} angle {angle}: {err}");
                }
            }
        }
    }

    #[test]
    fn rotation_matrices_are_unitary() {
        for spin in [7.5, 25.0, 100.0] {
            let u = rotation_matrix(spin, &Vector3::new(0.6, 0.0, 0.8), 1.1);
            let id = u.adjoint() * &u;
            let err = (id - DMatrix::<Complex64>::identity(u.nrows(), u.ncols()))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "spin {spin}: {err}");
        }
    }

    #[test]
    fn rotation_moves_mean_like_a_vector() {
        let spin = 40.0;
        let s = DickeState::css(spin, 0.9, -0.4).unwrap();
        let axis = Vector3::new(1.0, 2.0, -0.5).normalize();
        let angle = 0.75;
        let before = s.moments().mean;
        let after = s.rotate(&axis, angle).unwrap().moments().mean;
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        assert_relative_eq!(after, rot * before, epsilon = 1e-8);
    }

    #[test]
    fn rotation_at_maximum_spin() {
        let s = DickeState::css(MAX_SPIN, 0.0, 0.0).unwrap();
        let r = s.rotate(&Vector3::y(), FRAC_PI_2).unwrap();
        assert_relative_eq!(r.norm(), 1.0, epsilon = 1e-10);
        let m = r.moments();
        assert_relative_eq!(m.mean.x.abs(), MAX_SPIN, max_relative = 1e-9);
        assert_relative_eq!(m.covariance()[(2, 2)], MAX_SPIN / 2.0, max_relative = 1e-8);
    }
}
