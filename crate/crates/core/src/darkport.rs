//! Photon statistics of the dark output port in the strong-field limit.
//!
//! Near `gamma = pi/2` the dark port carries a weak squeezed coherent state
//! `S(zeta) D(alpha_tilde)|0>` with
//!
//! ```text
//! alpha_tilde = -alpha delta cosh r - conj(alpha) delta e^{i theta} sinh r
//! ```
//!
//! Its Fock amplitudes are Hermite polynomials in
//! `alpha_tilde e^{-i theta/2} / sqrt(2 sinh r cosh r)`. They are generated
//! by the normalised three-term recurrence in log-scaled form, which keeps
//! photon numbers of several thousand finite without large cancelling logs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{compensated_sum, normalized_hermite_sequence, LogScaledComplex};
use crate::states::{phase_mismatch, CoherentParams, Moments, PhotonDistribution, SqueezeParams};

/// Below this squeezing factor the amplitudes are taken from the exact
/// `r -> 0` (coherent-state) limit instead of the Hermite form.
pub const R_MIN: f64 = 1e-9;

/// Largest `|delta|` accepted at all.
pub const DELTA_LIMIT: f64 = 0.5;

/// Above this `|delta|` the first-order result is flagged as marginal.
pub const DELTA_WARN: f64 = 0.2;

/// Default hard limit on the automatically grown cutoff.
pub const DEFAULT_MAX_CUTOFF: usize = 100_000;

const MODULE: &str = "darkport";

/// Coherent amplitude of the squeezed coherent state leaving the dark port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDisplacement {
    alpha_tilde: Complex64,
    global_phase_delta: f64,
    beyond_first_order: bool,
}

impl EffectiveDisplacement {
    pub fn alpha_tilde(&self) -> Complex64 {
        self.alpha_tilde
    }

    /// `Delta = sin(theta - 2 phi) sinh(2r) / 2`.
    pub fn global_phase_delta(&self) -> f64 {
        self.global_phase_delta
    }

    /// The unobservable overall phase `exp(i |alpha|^2 delta^2 Delta)` of the output state.
    pub fn global_phase(&self, alpha: &CoherentParams, delta: f64) -> Complex64 {
        let weight = alpha.magnitude() * alpha.magnitude() * delta * delta;
        Complex64::from_polar(1.0, weight * self.global_phase_delta)
    }

    /// Set when `DELTA_WARN < |delta| <= DELTA_LIMIT`.
    pub fn is_beyond_first_order(&self) -> bool {
        self.beyond_first_order
    }

    /// Build directly from an `alpha_tilde` (no phase information).
    pub fn from_alpha_tilde(alpha_tilde: Complex64) -> Self {
        Self {
            alpha_tilde,
            global_phase_delta: 0.0,
            beyond_first_order: false,
        }
    }
}

pub fn effective_displacement(
    alpha: &CoherentParams,
    zeta: &SqueezeParams,
    delta: f64,
) -> Result<EffectiveDisplacement> {
    if !delta.is_finite() || delta.abs() > DELTA_LIMIT {
        return Err(Error::invalid(
            "delta",
            format!("|delta| must not exceed {DELTA_LIMIT}, got {delta}"),
        ));
    }
    let r = zeta.r();
    let a = alpha.as_complex();
    let alpha_tilde = -a * delta * r.cosh() - a.conj() * delta * zeta.unit_phase() * r.sinh();
    let global_phase_delta = 0.5 * (zeta.theta() - 2.0 * alpha.phase()).sin() * (2.0 * r).sinh();
    Ok(EffectiveDisplacement {
        alpha_tilde,
        global_phase_delta,
        beyond_first_order: delta.abs() > DELTA_WARN,
    })
}

/// `f_n / sqrt(n!)` for `n = 0 ..= cutoff`: the Fock amplitudes of `S(zeta) D(alpha_tilde)|0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    terms: Vec<LogScaledComplex>,
    zeta: SqueezeParams,
    displacement: EffectiveDisplacement,
}

impl AmplitudeSeries {
    pub fn terms(&self) -> &[LogScaledComplex] {
        &self.terms
    }

    pub fn zeta(&self) -> &SqueezeParams {
        &self.zeta
    }

    pub fn displacement(&self) -> &EffectiveDisplacement {
        &self.displacement
    }

    pub fn cutoff(&self) -> usize {
        self.terms.len() - 1
    }

    /// `|term_n|^2`, with anything below the smallest normal `f64` stored as exact zero.
    pub fn probabilities(&self) -> Vec<f64> {
        let floor = f64::MIN_POSITIVE.ln();
        self.terms
            .iter()
            .map(|t| {
                let lp = t.log_norm_sqr();
                if lp < floor {
                    0.0
                } else {
                    lp.exp()
                }
            })
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.probabilities())
    }
}

pub fn fock_amplitudes(
    zeta: &SqueezeParams,
    eff: &EffectiveDisplacement,
    cutoff: usize,
) -> AmplitudeSeries {
    let terms = if zeta.r() < R_MIN {
        coherent_limit_terms(eff.alpha_tilde, cutoff)
    } else {
        squeezed_terms(zeta, eff.alpha_tilde, cutoff)
    };
    AmplitudeSeries {
        terms,
        zeta: *zeta,
        displacement: *eff,
    }
}

/// `alpha^n e^{-|alpha|^2/2} / sqrt(n!)`.
fn coherent_limit_terms(alpha: Complex64, cutoff: usize) -> Vec<LogScaledComplex> {
    let prefactor = LogScaledComplex::new(-0.5 * alpha.norm_sqr(), 0.0);
    normalized_hermite_sequence(cutoff, alpha, Complex64::new(0.0, 0.0))
        .into_iter()
        .map(|g| prefactor * g)
        .collect()
}

/// `exp(E) / sqrt(cosh r) * (tanh r / 2)^{n/2} e^{i n theta/2} H_n(z) / sqrt(n!)`,
/// with `E = -(|alpha_tilde|^2 - e^{-i theta} alpha_tilde^2 tanh r)/2`, generated
/// by the equivalent recurrence in `alpha_tilde / cosh r` and `e^{i theta} tanh r`.
fn squeezed_terms(zeta: &SqueezeParams, alpha_tilde: Complex64, cutoff: usize) -> Vec<LogScaledComplex> {
    let r = zeta.r();
    let theta = zeta.theta();
    let (cosh_r, tanh_r) = (r.cosh(), r.tanh());

    // In the rotated frame beta = alpha_tilde e^{-i theta/2} the exponent is
    // free of cancellation: Re E = -(beta_r^2 (1 - tanh r) + beta_i^2 (1 + tanh r))/2.
    let beta = alpha_tilde * Complex64::from_polar(1.0, -0.5 * theta);
    let one_minus_tanh = 2.0 / ((2.0 * r).exp() + 1.0);
    let exponent = Complex64::new(
        -0.5 * (beta.re * beta.re * one_minus_tanh + beta.im * beta.im * (1.0 + tanh_r)),
        beta.re * beta.im * tanh_r,
    );
    let prefactor = LogScaledComplex::new(exponent.re - 0.5 * cosh_r.ln(), exponent.im);

    normalized_hermite_sequence(cutoff, alpha_tilde / cosh_r, Complex64::from_polar(tanh_r, theta))
        .into_iter()
        .map(|g| prefactor * g)
        .collect()
}

/// Dark-port photon-number distribution, grown until `1 - sum P_n <= target_residual`.
pub fn distribution(
    alpha: &CoherentParams,
    zeta: &SqueezeParams,
    delta: f64,
    target_residual: f64,
) -> Result<PhotonDistribution> {
    distribution_with_limit(alpha, zeta, delta, target_residual, DEFAULT_MAX_CUTOFF)
}

pub fn distribution_with_limit(
    alpha: &CoherentParams,
    zeta: &SqueezeParams,
    delta: f64,
    target_residual: f64,
    max_cutoff: usize,
) -> Result<PhotonDistribution> {
    if !(target_residual > 0.0 && target_residual <= 1e-3) {
        return Err(Error::invalid(
            "target_residual",
            format!("must lie in (0, 1e-3], got {target_residual}"),
        ));
    }
    let eff = effective_displacement(alpha, zeta, delta)?;
    let moments = analytic_moments(alpha, zeta, delta);
    let mut cutoff = initial_cutoff(&moments).min(max_cutoff);

    loop {
        let series = fock_amplitudes(zeta, &eff, cutoff);
        let probabilities = series.probabilities();
        let residual = 1.0 - compensated_sum(probabilities.iter().copied());
        if residual <= target_residual {
            return Ok(PhotonDistribution::with_residual(probabilities, residual));
        }
        // far beyond the support what remains is rounding, not truncation
        if cutoff as f64 > moments.mean + 40.0 * moments.std_dev() + 100.0 {
            return Err(Error::NonConvergence {
                module: MODULE,
                iterations: cutoff,
                residual,
            });
        }
        if cutoff >= max_cutoff {
            return Err(Error::CutoffExceeded {
                module: MODULE,
                cutoff,
                limit: max_cutoff,
                residual,
            });
        }
        cutoff = (2 * cutoff).min(max_cutoff);
    }
}

fn initial_cutoff(moments: &Moments) -> usize {
    let guess = moments.mean + 12.0 * moments.std_dev();
    (guess.ceil() as usize).max(16)
}

/// Closed-form mean and variance of the dark-port photon number.
pub fn analytic_moments(alpha: &CoherentParams, zeta: &SqueezeParams, delta: f64) -> Moments {
    let r = zeta.r();
    let coherent = alpha.magnitude() * alpha.magnitude() * delta * delta;
    let mismatch = phase_mismatch(alpha, zeta);
    let (sinh_r, cosh_r) = (r.sinh(), r.cosh());
    let vacuum_noise = 2.0 * sinh_r * sinh_r * cosh_r * cosh_r;
    Moments {
        mean: coherent + sinh_r * sinh_r,
        variance: coherent * ((2.0 * r).cosh() - mismatch.cos() * (2.0 * r).sinh()) + vacuum_noise,
    }
}

/// Moments at the noise-minimising phase `theta = 2 phi`.
pub fn optimal_phase_moments(alpha: &CoherentParams, zeta: &SqueezeParams, delta: f64) -> Moments {
    let r = zeta.r();
    let coherent = alpha.magnitude() * alpha.magnitude() * delta * delta;
    let (sinh_r, cosh_r) = (r.sinh(), r.cosh());
    Moments {
        mean: coherent + sinh_r * sinh_r,
        variance: coherent * (-2.0 * r).exp() + 2.0 * sinh_r * sinh_r * cosh_r * cosh_r,
    }
}

/// Leading-order ratio of counting-noise widths with and without squeezing, `e^{-r}`.
pub fn noise_reduction(r: f64) -> f64 {
    (-r).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn coherent(mag: f64, phase: f64) -> CoherentParams {
        CoherentParams::new(mag, phase).unwrap()
    }

    fn squeeze(r: f64, theta: f64) -> SqueezeParams {
        SqueezeParams::new(r, theta).unwrap()
    }

    #[test]
    fn effective_displacement_examples() {
        let e = effective_displacement(&coherent(1.0, 0.0), &squeeze(0.0, 0.0), 0.1).unwrap();
        assert!((e.alpha_tilde() - Complex64::new(-0.1, 0.0)).norm() < 1e-15);
        assert_eq!(e.global_phase_delta(), 0.0);

        let e = effective_displacement(&coherent(3.0, 1.0), &squeeze(0.7, 2.0), 0.0).unwrap();
        assert_eq!(e.alpha_tilde().norm(), 0.0);

        let e = effective_displacement(&coherent(1.0, 0.0), &squeeze(1.0, 0.0), 0.1).unwrap();
        // -0.1 e
        assert!((e.alpha_tilde() - Complex64::new(-0.271_828_182_845_904_5, 0.0)).norm() < 1e-15);
        assert_eq!(e.global_phase_delta(), 0.0);
    }

    #[test]
    fn delta_range_is_enforced() {
        let a = coherent(1.0, 0.0);
        let z = squeeze(0.5, 0.0);
        assert!(effective_displacement(&a, &z, 0.6).is_err());
        assert!(effective_displacement(&a, &z, 0.3).unwrap().is_beyond_first_order());
        assert!(!effective_displacement(&a, &z, 0.1).unwrap().is_beyond_first_order());
    }

    #[test]
    fn global_phase_vanishes_at_optimal_phase_and_without_squeezing() {
        let e = effective_displacement(&coherent(5.0, 0.3), &squeeze(1.2, 0.6), 0.05).unwrap();
        assert!(e.global_phase_delta().abs() < 1e-15);
        let e = effective_displacement(&coherent(5.0, 0.3), &squeeze(0.0, 2.0), 0.05).unwrap();
        assert_eq!(e.global_phase_delta(), 0.0);
        let e = effective_displacement(&coherent(5.0, 0.0), &squeeze(1.0, PI / 2.0), 0.05).unwrap();
        assert!((e.global_phase_delta() - 0.5 * (2.0_f64).sinh()).abs() < 1e-14);
        let a = coherent(5.0, 0.0);
        let phase = e.global_phase(&a, 0.05);
        // |alpha|^2 delta^2 = 0.0625
        assert!((phase.arg() - 0.0625 * 0.5 * (2.0_f64).sinh()).abs() < 1e-12);
    }

    #[test]
    fn alpha_tilde_saturates_its_bound_at_aligned_phases() {
        let a = coherent(20.0, 0.4);
        let z = squeeze(0.9, 0.8);
        let e = effective_displacement(&a, &z, 0.05).unwrap();
        let bound = 20.0 * 0.05 * (0.9_f64.cosh() + 0.9_f64.sinh());
        assert!((e.alpha_tilde().norm() - bound).abs() < 1e-12);
        let z = squeeze(0.9, 2.0);
        let e = effective_displacement(&a, &z, 0.05).unwrap();
        assert!(e.alpha_tilde().norm() < bound);
    }

    #[test]
    fn squeezed_vacuum_amplitudes() {
        let eff = EffectiveDisplacement::from_alpha_tilde(Complex64::new(0.0, 0.0));
        let s = fock_amplitudes(&squeeze(1.0, 0.0), &eff, 9);
        let p = s.probabilities();
        // 1 / cosh 1
        assert!((p[0] - 0.648_054_273_663_885_4).abs() < 1e-14);
        // tanh^2 1 / (2 cosh 1)
        assert!((p[2] - 0.187_944_053_375_869_6).abs() < 1e-14);
        for n in (1..=9).step_by(2) {
            assert!(s.terms()[n].is_zero(), "odd n={n} must be an exact zero");
        }
    }

    #[test]
    fn coherent_limit_branch() {
        let eff = EffectiveDisplacement::from_alpha_tilde(Complex64::new(-0.1, 0.0));
        let s = fock_amplitudes(&squeeze(0.0, 0.0), &eff, 3);
        let p = s.probabilities();
        assert!((p[1] - (-0.01_f64).exp() * 0.01).abs() < 1e-17);
        assert!((s.terms()[1].to_complex().re + 0.1 * (-0.005_f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn vacuum_distribution_without_offset_or_squeezing() {
        let d = distribution(&coherent(10.0, 0.0), &squeeze(0.0, 0.0), 0.0, 1e-12).unwrap();
        assert_eq!(d.get(0), 1.0);
        assert!(d.probabilities()[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn squeezed_vacuum_distribution_without_offset() {
        let d = distribution(&coherent(10.0, 0.0), &squeeze(1.0, 0.0), 0.0, 1e-12).unwrap();
        assert!((d.get(0) - 0.648_054_273_663_885_4).abs() < 1e-13);
        assert_eq!(d.get(1), 0.0);
        assert!((d.get(2) - 0.187_944_053_375_869_6).abs() < 1e-13);
        assert!(d.normalization_residual() <= 1e-12);
    }

    #[test]
    fn residual_target_is_validated() {
        let a = coherent(1.0, 0.0);
        let z = squeeze(0.5, 0.0);
        assert!(distribution(&a, &z, 0.1, 0.0).is_err());
        assert!(distribution(&a, &z, 0.1, 0.01).is_err());
    }

    #[test]
    fn cutoff_limit_is_reported() {
        let a = coherent(2000.0, 0.0);
        let err = distribution_with_limit(&a, &squeeze(1.0, 0.0), 0.1, 1e-12, 100).unwrap_err();
        match err {
            Error::CutoffExceeded { module, limit, .. } => {
                assert_eq!(module, "darkport");
                assert_eq!(limit, 100);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn moments_examples() {
        let a = coherent(3.0, 0.2);
        let m = analytic_moments(&a, &squeeze(0.0, 1.0), 0.1);
        assert!((m.mean - 0.09).abs() < 1e-15);
        assert!((m.variance - 0.09).abs() < 1e-15);

        let m = analytic_moments(&a, &squeeze(1.0, 1.0), 0.0);
        assert!((m.mean - 1.381_097_845_541_815_7).abs() < 1e-14);
        assert!((m.variance - 6.577_058_209_004_121_7).abs() < 1e-13);

        let a = coherent(50_000_f64.sqrt(), 0.0);
        let m = analytic_moments(&a, &squeeze(1.0, 0.0), 0.1);
        assert!((m.mean - 501.3811).abs() < 1e-4);
        assert!((m.variance - 74.245).abs() < 1e-3);
    }

    #[test]
    fn optimal_phase_moments_examples() {
        let a = coherent(50_000_f64.sqrt(), 0.0);
        let m = optimal_phase_moments(&a, &squeeze(0.0, 0.0), 0.1);
        assert!((m.variance - 500.0).abs() < 1e-9);
        let m = optimal_phase_moments(&a, &squeeze(1.5, 0.0), 0.1);
        assert!((m.mean - 504.534).abs() < 1e-3);
        assert!((m.variance - 75.07).abs() < 1e-2);
        let m1 = optimal_phase_moments(&a, &squeeze(1.0, 0.0), 0.1);
        assert!((m1.variance - 74.245).abs() < 1e-3);

        for &r in &[0.0, 0.3, 0.9, 1.5, 2.5] {
            let a = coherent(40.0, 0.35);
            let z = squeeze(r, 0.7);
            let general = analytic_moments(&a, &z, 0.07);
            let optimal = optimal_phase_moments(&a, &z, 0.07);
            assert_eq!(general.mean, optimal.mean);
            assert!((general.variance - optimal.variance).abs() <= 1e-12 * optimal.variance);
        }
    }

    #[test]
    fn noise_reduction_examples() {
        assert_eq!(noise_reduction(0.0), 1.0);
        assert!((noise_reduction(1.0) - 0.367_879).abs() < 1e-6);
        assert!((noise_reduction(0.7) - 0.496_585).abs() < 1e-6);
        // 0.7 is the first point of a 0.1 grid below one half.
        assert!(noise_reduction(0.6) > 0.5);
    }

    #[test]
    fn unreachable_residual_is_reported() {
        let alpha = CoherentParams::new(1000.0, 0.0).unwrap();
        let zeta = SqueezeParams::new(1.0, 0.0).unwrap();
        let err = distribution(&alpha, &zeta, 0.02, 1e-18).unwrap_err();
        assert!(err.is_numerical());
        assert!(err.residual().unwrap() > 1e-18);
    }
}
