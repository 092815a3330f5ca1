//! Exact photon-number moments by propagating Gaussian quadrature moments.
//!
//! Convention (hbar = 1): `x = (b + b^dag)/sqrt(2)`, `p = (b - b^dag)/(i sqrt(2))`,
//! phase-space ordering `(x1, p1, x2, p2)`, vacuum covariance `I/2`.
//! Squeezing `S(zeta)` with `zeta = r e^{i theta}` shrinks the quadrature
//! along `(cos theta/2, sin theta/2)` to `e^{-2r}/2`, so a coherent
//! displacement with phase `phi` sees the reduced noise exactly when
//! `theta = 2 phi`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{CoherentParams, Moments, Port, SqueezeParams};

/// Two-mode Gaussian state: quadrature means and symmetrised covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTwoMode {
    mean: Vector4<f64>,
    cov: Matrix4<f64>,
}

impl GaussianTwoMode {
    /// Validates symmetry and the uncertainty relation `cov + i Omega / 2 >= 0`.
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self> {
        if (cov - cov.transpose()).abs().max() > 1e-12 {
            return Err(Error::invalid("cov", "covariance must be symmetric"));
        }
        let state = Self { mean, cov };
        let lowest = state.uncertainty_eigenvalue();
        if lowest < -1e-10 {
            return Err(Error::invalid(
                "cov",
                format!("violates the uncertainty relation (eigenvalue {lowest:.3e})"),
            ));
        }
        Ok(state)
    }

    pub fn vacuum() -> Self {
        Self {
            mean: Vector4::zeros(),
            cov: Matrix4::identity() * 0.5,
        }
    }

    pub fn mean(&self) -> &Vector4<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix4<f64> {
        &self.cov
    }

    /// `det(2 cov)`; equals one for pure states.
    pub fn purity_determinant(&self) -> f64 {
        (self.cov * 2.0).determinant()
    }

    /// Smallest eigenvalue of the Hermitian matrix `cov + i Omega / 2`.
    pub fn uncertainty_eigenvalue(&self) -> f64 {
        let omega = symplectic_form();
        let m = Matrix4::from_fn(|i, j| Complex64::new(self.cov[(i, j)], 0.5 * omega[(i, j)]));
        SymmetricEigen::new(m).eigenvalues.min()
    }

    /// Mean and covariance block of one mode.
    pub fn port_block(&self, port: Port) -> (Vector2<f64>, Matrix2<f64>) {
        let k = port_offset(port);
        (
            self.mean.fixed_rows::<2>(k).into_owned(),
            self.cov.fixed_view::<2, 2>(k, k).into_owned(),
        )
    }
}

fn port_offset(port: Port) -> usize {
    match port {
        Port::One => 0,
        Port::Two => 2,
    }
}

/// Block-diagonal `[[0, 1], [-1, 0]]`.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut omega = Matrix4::zeros();
    omega[(0, 1)] = 1.0;
    omega[(1, 0)] = -1.0;
    omega[(2, 3)] = 1.0;
    omega[(3, 2)] = -1.0;
    omega
}

/// Covariance of `S(zeta)|0>`.
pub fn squeezed_vacuum_cov(zeta: &SqueezeParams) -> Matrix2<f64> {
    let r = zeta.r();
    let (s, c) = (0.5 * zeta.theta()).sin_cos();
    let rotation = Matrix2::new(c, -s, s, c);
    let diag = Matrix2::new((-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp());
    rotation * diag * rotation.transpose() * 0.5
}

/// Coherent state in input port 1, squeezed vacuum in input port 2.
pub fn input_state(alpha: &CoherentParams, zeta: &SqueezeParams) -> GaussianTwoMode {
    let a = alpha.as_complex();
    let root2 = std::f64::consts::SQRT_2;
    let mean = Vector4::new(root2 * a.re, root2 * a.im, 0.0, 0.0);
    let mut cov = Matrix4::zeros();
    cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&(Matrix2::identity() * 0.5));
    cov.fixed_view_mut::<2, 2>(2, 2).copy_from(&squeezed_vacuum_cov(zeta));
    GaussianTwoMode { mean, cov }
}

/// Phase-space map from input to output quadratures.
///
/// The mode operators obey `a = R b` with `R = [[cos g, sin g], [-sin g, cos g]]`,
/// so outputs are `b = R^T a`, applied identically to the x and p pairs. At
/// `gamma = pi/2` input port 1 is routed to output port 2.
pub fn beam_splitter_symplectic(gamma: f64) -> Matrix4<f64> {
    let (s, c) = gamma.sin_cos();
    #[rustfmt::skip]
    let m = Matrix4::new(
        c, 0.0, -s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, s, 0.0, c,
    );
    m
}

pub fn apply_beam_splitter(state: &GaussianTwoMode, gamma: f64) -> GaussianTwoMode {
    let t = beam_splitter_symplectic(gamma);
    let cov = t * state.cov * t.transpose();
    GaussianTwoMode {
        mean: t * state.mean,
        // re-symmetrise against round-off
        cov: (cov + cov.transpose()) * 0.5,
    }
}

/// Photon-number mean and variance of one mode of a Gaussian state.
///
/// With `V` the mode covariance and `d` its mean:
/// `<n> = (tr V - 1)/2 + |d|^2/2` and `Var n = (tr V^2 - 1/2)/2 + d^T V d`.
pub fn photon_moments(state: &GaussianTwoMode, port: Port) -> Moments {
    let (d, v) = state.port_block(port);
    let mean = 0.5 * (v.trace() - 1.0) + 0.5 * d.norm_squared();
    let variance = 0.5 * ((v * v).trace() - 0.5) + (d.transpose() * v * d)[(0, 0)];
    Moments { mean, variance }
}

/// Exact dark-port (output port 1) moments at splitter angle `gamma`.
pub fn exact_dark_port_moments(alpha: &CoherentParams, zeta: &SqueezeParams, gamma: f64) -> Moments {
    let out = apply_beam_splitter(&input_state(alpha, zeta), gamma);
    photon_moments(&out, Port::One)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn coherent(mag: f64, phase: f64) -> CoherentParams {
        CoherentParams::new(mag, phase).unwrap()
    }

    fn squeeze(r: f64, theta: f64) -> SqueezeParams {
        SqueezeParams::new(r, theta).unwrap()
    }

    #[test]
    fn input_state_examples() {
        let vac = input_state(&CoherentParams::vacuum(), &SqueezeParams::none());
        assert_eq!(vac, GaussianTwoMode::vacuum());

        let sq = input_state(&CoherentParams::vacuum(), &squeeze(1.0, 0.0));
        let (_, v2) = sq.port_block(Port::Two);
        // e^{-2}/2 along x at theta = 0, e^{2}/2 along p
        assert!((v2[(0, 0)] - 0.067_667_641_618_306_35).abs() < 1e-15);
        assert!((v2[(1, 1)] - 3.694_528_049_465_325).abs() < 1e-14);
        assert!(v2[(0, 1)].abs() < 1e-15);
        assert!((sq.purity_determinant() - 1.0).abs() < 1e-12);

        let coh = input_state(&coherent(2.0, 0.0), &SqueezeParams::none());
        assert!((coh.mean() - Vector4::new(2.0 * SQRT_2, 0.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rotated_squeezing_keeps_eigenvalues() {
        let v = squeezed_vacuum_cov(&squeeze(0.8, 1.9));
        let eig = v.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        assert!((lo - 0.5 * (-1.6_f64).exp()).abs() < 1e-14);
        assert!((hi - 0.5 * (1.6_f64).exp()).abs() < 1e-13);
        // squeezed direction is (cos 0.95, sin 0.95)
        let u = Vector2::new(0.95_f64.cos(), 0.95_f64.sin());
        assert!(((u.transpose() * v * u)[(0, 0)] - lo).abs() < 1e-14);
    }

    #[test]
    fn beam_splitter_examples() {
        let state = input_state(&coherent(2.0, 0.0), &squeeze(0.6, 0.4));
        let same = apply_beam_splitter(&state, 0.0);
        assert!((same.mean() - state.mean()).norm() < 1e-15);
        assert!((same.cov() - state.cov()).norm() < 1e-15);

        let coh = input_state(&coherent(2.0, 0.0), &SqueezeParams::none());
        let swapped = apply_beam_splitter(&coh, FRAC_PI_2);
        // port-1 light exits port 2 with a + sign
        assert!((swapped.mean() - Vector4::new(0.0, 0.0, 2.0 * SQRT_2, 0.0)).norm() < 1e-14);

        for gamma in [0.1, 0.7, 1.3] {
            let out = apply_beam_splitter(&GaussianTwoMode::vacuum(), gamma);
            assert!((out.cov() - Matrix4::identity() * 0.5).norm() < 1e-15);
        }
    }

    #[test]
    fn beam_splitter_preserves_purity_and_uncertainty() {
        let state = input_state(&coherent(1.3, 0.4), &squeeze(1.1, 2.2));
        for gamma in [0.0, 0.3, 0.9, FRAC_PI_2] {
            let out = apply_beam_splitter(&state, gamma);
            assert!((out.purity_determinant() - 1.0).abs() < 1e-12);
            assert!(out.uncertainty_eigenvalue() > -1e-10);
            let t = beam_splitter_symplectic(gamma);
            let omega = symplectic_form();
            assert!((t * omega * t.transpose() - omega).norm() < 1e-15);
        }
    }

    #[test]
    fn invalid_covariance_is_rejected() {
        let squeezed_too_far = Matrix4::from_diagonal(&Vector4::new(0.1, 0.1, 0.5, 0.5));
        assert!(GaussianTwoMode::new(Vector4::zeros(), squeezed_too_far).is_err());
        let mut asym = Matrix4::identity() * 0.5;
        asym[(0, 1)] = 0.1;
        assert!(GaussianTwoMode::new(Vector4::zeros(), asym).is_err());
        assert!(GaussianTwoMode::new(Vector4::zeros(), Matrix4::identity() * 0.5).is_ok());
    }

    #[test]
    fn photon_moment_examples() {
        let m = photon_moments(&GaussianTwoMode::vacuum(), Port::One);
        assert!(m.mean.abs() < 1e-15 && m.variance.abs() < 1e-15);

        let coh = input_state(&coherent(3.0, 0.9), &SqueezeParams::none());
        let m = photon_moments(&coh, Port::One);
        assert!((m.mean - 9.0).abs() < 1e-13);
        assert!((m.variance - 9.0).abs() < 1e-13);

        let sq = input_state(&CoherentParams::vacuum(), &squeeze(1.0, 0.3));
        let m = photon_moments(&sq, Port::Two);
        assert!((m.mean - 1.381_097_845_541_815_7).abs() < 1e-13);
        assert!((m.variance - 6.577_058_209_004_121_7).abs() < 1e-12);
    }

    #[test]
    fn exact_dark_port_endpoints() {
        let a = coherent(2.5, 0.3);
        let z = squeeze(0.9, 1.0);
        let m = exact_dark_port_moments(&a, &z, 0.0);
        assert!((m.mean - 6.25).abs() < 1e-12);
        assert!((m.variance - 6.25).abs() < 1e-12);
        let m = exact_dark_port_moments(&a, &z, FRAC_PI_2);
        assert!((m.mean - 0.9_f64.sinh().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn exact_mean_closed_form() {
        let a = coherent(4.0, 1.1);
        let z = squeeze(0.7, 0.2);
        for gamma in [0.1, 0.5, 1.0, 1.5] {
            let m = exact_dark_port_moments(&a, &z, gamma);
            let expected = 16.0 * gamma.cos().powi(2) + gamma.sin().powi(2) * 0.7_f64.sinh().powi(2);
            assert!((m.mean - expected).abs() < 1e-12 * expected);
        }
    }
}
