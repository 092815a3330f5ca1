//! Physical inputs and the output containers shared by every engine.
//!
//! All angles are radians. The dark-port engines work with the small offset
//! `delta`, the exact engines with the splitter angle `gamma`; [`PortGeometry`]
//! is the only place that converts between them (`delta = pi/2 - gamma`).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{compensated_sum, wrap_phase};

/// Wrap an angle into `[0, 2pi)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let p = angle.rem_euclid(2.0 * PI);
    if p >= 2.0 * PI {
        0.0
    } else {
        p
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}

/// Coherent (laser) input `alpha = |alpha| e^{i phi}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    magnitude: f64,
    phase: f64,
}

impl CoherentParams {
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        check_finite("alpha magnitude", magnitude)?;
        check_finite("alpha phase", phase)?;
        if magnitude < 0.0 {
            return Err(Error::invalid("alpha magnitude", "must be non-negative"));
        }
        Ok(Self {
            magnitude,
            phase: wrap_angle(phase),
        })
    }

    pub fn vacuum() -> Self {
        Self {
            magnitude: 0.0,
            phase: 0.0,
        }
    }

    pub fn from_complex(alpha: Complex64) -> Result<Self> {
        Self::new(alpha.norm(), alpha.arg())
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Squeeze parameter `zeta = r e^{i theta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    r: f64,
    theta: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        check_finite("r", r)?;
        check_finite("theta", theta)?;
        if r < 0.0 {
            return Err(Error::invalid("r", "squeezing factor must be non-negative"));
        }
        Ok(Self {
            r,
            theta: wrap_angle(theta),
        })
    }

    pub fn none() -> Self {
        Self { r: 0.0, theta: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }

    /// `e^{i theta}`.
    pub fn unit_phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }
}

/// Beam-splitter orientation: `gamma` in `[0, pi/2]`, dark-port offset `delta = pi/2 - gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortGeometry {
    gamma: f64,
    delta: f64,
}

impl PortGeometry {
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        check_finite("gamma", gamma)?;
        if !(0.0..=FRAC_PI_2).contains(&gamma) {
            return Err(Error::invalid("gamma", format!("must lie in [0, pi/2], got {gamma}")));
        }
        Ok(Self {
            gamma,
            delta: FRAC_PI_2 - gamma,
        })
    }

    pub fn from_delta(delta: f64) -> Result<Self> {
        check_finite("delta", delta)?;
        if !(0.0..=FRAC_PI_2).contains(&delta) {
            return Err(Error::invalid("delta", format!("must lie in [0, pi/2], got {delta}")));
        }
        Ok(Self {
            gamma: FRAC_PI_2 - delta,
            delta,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Output port of the beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    /// The dark port near `gamma = pi/2`.
    One,
    Two,
}

/// Mean and variance of a photon-number distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn std_dev(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Truncated photon-number probabilities `P_0 ..= P_cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probabilities: Vec<f64>,
    normalization_residual: f64,
}

impl PhotonDistribution {
    /// Wrap raw probabilities; the residual `1 - sum` is computed here and
    /// clamped at zero (round-off can push the sum a few ulps above one).
    pub fn from_probabilities(probabilities: Vec<f64>) -> Self {
        assert!(!probabilities.is_empty(), "distribution needs at least P_0");
        let total = compensated_sum(probabilities.iter().copied());
        Self {
            probabilities,
            normalization_residual: (1.0 - total).max(0.0),
        }
    }

    pub(crate) fn with_residual(probabilities: Vec<f64>, normalization_residual: f64) -> Self {
        Self {
            probabilities,
            normalization_residual: normalization_residual.max(0.0),
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn cutoff(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn normalization_residual(&self) -> f64 {
        self.normalization_residual
    }

    pub fn get(&self, n: usize) -> f64 {
        self.probabilities.get(n).copied().unwrap_or(0.0)
    }

    /// Mean and variance from the truncated sums.
    pub fn moments(&self) -> Moments {
        let p = &self.probabilities;
        let mean = compensated_sum(p.iter().enumerate().map(|(n, &v)| n as f64 * v));
        let variance = compensated_sum(
            p.iter()
                .enumerate()
                .map(|(n, &v)| (n as f64 - mean).powi(2) * v),
        );
        Moments { mean, variance }
    }

    /// Half the L1 distance; the shorter vector is zero-padded.
    pub fn total_variation(&self, other: &PhotonDistribution) -> f64 {
        let len = self.probabilities.len().max(other.probabilities.len());
        0.5 * compensated_sum((0..len).map(|n| (self.get(n) - other.get(n)).abs()))
    }

    /// Number of local maxima, treating runs of values equal within
    /// `rel_tol` as a single plateau.
    pub fn local_maxima(&self, rel_tol: f64) -> usize {
        self.local_maxima_above(rel_tol, 0.0)
    }

    /// [`local_maxima`](Self::local_maxima) restricted to peaks with `P_n >= floor`.
    pub fn local_maxima_above(&self, rel_tol: f64, floor: f64) -> usize {
        let p = &self.probabilities;
        let same = |a: f64, b: f64| (a - b).abs() <= rel_tol * a.abs().max(b.abs());
        let mut count = 0;
        let mut i = 0;
        while i < p.len() {
            let mut j = i;
            while j + 1 < p.len() && same(p[j + 1], p[i]) {
                j += 1;
            }
            let left_lower = i == 0 || p[i - 1] < p[i];
            let right_lower = j + 1 == p.len() || p[j + 1] < p[j];
            if p[i] > 0.0 && p[i] >= floor && left_lower && right_lower {
                count += 1;
            }
            i = j + 1;
        }
        count
    }
}

/// Scalar summaries used to label parameter points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// `|delta alpha|^2`, the coherent photon number reaching the dark port.
    pub delta_alpha_sq: f64,
    /// `theta - 2 phi` wrapped into `(-pi, pi]`.
    pub phase_mismatch: f64,
}

pub fn derived_quantities(
    alpha: &CoherentParams,
    zeta: &SqueezeParams,
    geom: &PortGeometry,
) -> DerivedQuantities {
    let delta = geom.delta();
    DerivedQuantities {
        delta_alpha_sq: delta * delta * alpha.magnitude() * alpha.magnitude(),
        phase_mismatch: phase_mismatch(alpha, zeta),
    }
}

/// `theta - 2 phi` wrapped into `(-pi, pi]`.
pub fn phase_mismatch(alpha: &CoherentParams, zeta: &SqueezeParams) -> f64 {
    wrap_phase(zeta.theta() - 2.0 * alpha.phase())
}
