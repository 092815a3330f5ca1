//! Brute-force two-mode Fock-space simulator.
//!
//! States live on the box `0 <= n1 <= c1`, `0 <= n2 <= c2`. Operators are
//! built as box-projected normal-ordered monomials in compressed sparse row
//! form, and exponentials act on vectors by sub-stepped Taylor series, so
//! nothing dense is ever formed.
//!
//! Beam-splitter convention: `a_i = U b_i U^dag` with `U = exp(gamma t12)`,
//! `t12 = b1 b2^dag - b1^dag b2`. This reproduces `a = R b`,
//! `R = [[cos g, sin g], [-sin g, cos g]]`, and routes input port 1 to
//! output port 2 at `gamma = pi/2`; [`beam_splitter_convention_error`]
//! checks both on the truncated space.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{compensated_sum, log_factorial};
use crate::states::{CoherentParams, Moments, PhotonDistribution, Port, SqueezeParams};

const MODULE: &str = "fockoracle";

type C = Complex64;

fn czero() -> C {
    C::new(0.0, 0.0)
}

/// Default bound on probability lost to truncation.
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 1e-9;

/// Per-mode cutoff that keeps truncation losses near `1e-11` for `|alpha|` and `r`.
///
/// The coherent part uses `|alpha|^2 + 10|alpha| + 20`. The squeezed-vacuum
/// tail beyond `n` photons is about `cosh^2 r tanh^n r`, which sets the
/// squeezing allowance; it is never below `10 sinh^2 r`.
pub fn required_cutoff(alpha_magnitude: f64, r: f64) -> usize {
    let a = alpha_magnitude;
    let coherent = a * a + 10.0 * a + 20.0;
    let tail = if r > 0.0 {
        ((TAIL_BUDGET.ln() - 2.0 * r.cosh().ln()) / r.tanh().ln()).max(0.0)
    } else {
        0.0
    };
    (coherent + tail.max(10.0 * r.sinh().powi(2))).ceil() as usize
}

const TAIL_BUDGET: f64 = 1e-11;

/// Annihilation operator on a truncated single mode: `a[n-1, n] = sqrt(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator {
    cutoff: usize,
    superdiagonal: Vec<f64>,
}

impl ModeOperator {
    pub fn new(cutoff: usize) -> Self {
        Self {
            cutoff,
            superdiagonal: (1..=cutoff).map(|n| (n as f64).sqrt()).collect(),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if col >= 1 && row + 1 == col && col <= self.cutoff {
            self.superdiagonal[col - 1]
        } else {
            0.0
        }
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        let mut out = vec![czero(); v.len()];
        for n in 1..v.len() {
            out[n - 1] = v[n] * self.superdiagonal[n - 1];
        }
        out
    }

    pub fn apply_adjoint(&self, v: &[C]) -> Vec<C> {
        let mut out = vec![czero(); v.len()];
        for n in 1..v.len() {
            out[n] = v[n - 1] * self.superdiagonal[n - 1];
        }
        out
    }
}

/// Single-mode amplitudes `c_0 ..= c_cutoff` with the probability left out.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub amplitudes: Vec<C>,
    pub norm_deficit: f64,
}

impl ModeAmplitudes {
    fn from_amplitudes(amplitudes: Vec<C>) -> Self {
        let norm = compensated_sum(amplitudes.iter().map(|c| c.norm_sqr()));
        Self {
            amplitudes,
            norm_deficit: (1.0 - norm).max(0.0),
        }
    }

    /// Fail if more than `threshold` probability fell outside the cutoff.
    pub fn require(self, threshold: f64) -> Result<Self> {
        if self.norm_deficit > threshold {
            Err(Error::Leakage {
                module: MODULE,
                leakage: self.norm_deficit,
                threshold,
            })
        } else {
            Ok(self)
        }
    }
}

/// `D(alpha)|0>`: `c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!)`.
pub fn coherent_fock(alpha: &CoherentParams, cutoff: usize) -> ModeAmplitudes {
    let mag = alpha.magnitude();
    let amplitudes = (0..=cutoff)
        .map(|n| {
            if mag == 0.0 {
                return if n == 0 { C::new(1.0, 0.0) } else { czero() };
            }
            let nf = n as f64;
            let log_mag = -0.5 * mag * mag + nf * mag.ln() - 0.5 * log_factorial(n as u64);
            C::from_polar(log_mag.exp(), nf * alpha.phase())
        })
        .collect();
    ModeAmplitudes::from_amplitudes(amplitudes)
}

/// `S(zeta)|0>`: `c_{2m} = (-e^{i theta} tanh r)^m sqrt((2m)!) / (2^m m!) / sqrt(cosh r)`.
pub fn squeezed_vacuum_fock(zeta: &SqueezeParams, cutoff: usize) -> ModeAmplitudes {
    let r = zeta.r();
    let amplitudes = (0..=cutoff)
        .map(|n| {
            if n % 2 == 1 {
                return czero();
            }
            let m = n / 2;
            if r == 0.0 {
                return if m == 0 { C::new(1.0, 0.0) } else { czero() };
            }
            let mf = m as f64;
            let log_mag = mf * r.tanh().ln() + 0.5 * log_factorial(n as u64)
                - mf * std::f64::consts::LN_2
                - log_factorial(m as u64)
                - 0.5 * r.cosh().ln();
            // (-e^{i theta})^m = e^{i m (theta + pi)}
            C::from_polar(log_mag.exp(), mf * (zeta.theta() + std::f64::consts::PI))
        })
        .collect();
    ModeAmplitudes::from_amplitudes(amplitudes)
}

/// Truncated two-mode state, amplitudes indexed by `(n1, n2)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FockStateVector {
    amplitudes: Vec<C>,
    cutoffs: (usize, usize),
    norm_deficit: f64,
}

impl FockStateVector {
    pub fn vacuum(cutoffs: (usize, usize)) -> Self {
        Self::basis(0, 0, cutoffs)
    }

    pub fn basis(n1: usize, n2: usize, cutoffs: (usize, usize)) -> Self {
        assert!(n1 <= cutoffs.0 && n2 <= cutoffs.1, "basis state outside the box");
        let mut amplitudes = vec![czero(); (cutoffs.0 + 1) * (cutoffs.1 + 1)];
        amplitudes[n1 * (cutoffs.1 + 1) + n2] = C::new(1.0, 0.0);
        Self {
            amplitudes,
            cutoffs,
            norm_deficit: 0.0,
        }
    }

    /// `|a> (x) |b>`; the deficit accounts for both factors' truncation.
    pub fn product(mode1: &ModeAmplitudes, mode2: &ModeAmplitudes) -> Self {
        let cutoffs = (mode1.amplitudes.len() - 1, mode2.amplitudes.len() - 1);
        let amplitudes = mode1
            .amplitudes
            .iter()
            .flat_map(|a| mode2.amplitudes.iter().map(move |b| a * b))
            .collect();
        let mut state = Self {
            amplitudes,
            cutoffs,
            norm_deficit: 0.0,
        };
        state.norm_deficit = (1.0 - state.norm_sqr()).max(0.0);
        state
    }

    /// Build from raw amplitudes; the deficit is `1 - <psi|psi>`.
    pub fn from_amplitudes(amplitudes: Vec<C>, cutoffs: (usize, usize)) -> Self {
        assert_eq!(amplitudes.len(), (cutoffs.0 + 1) * (cutoffs.1 + 1));
        let mut state = Self {
            amplitudes,
            cutoffs,
            norm_deficit: 0.0,
        };
        state.norm_deficit = (1.0 - state.norm_sqr()).max(0.0);
        state
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        self.cutoffs
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amplitudes
    }

    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.cutoffs.1 + 1) + n2
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> C {
        self.amplitudes[self.index(n1, n2)]
    }

    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.amplitudes.iter().map(|c| c.norm_sqr()))
    }

    pub fn inner(&self, other: &FockStateVector) -> C {
        assert_eq!(self.cutoffs, other.cutoffs, "states on different boxes");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &FockStateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Drop every component with `n1 + n2 > max_total`, moving its weight into the deficit.
    fn project_total(&mut self, max_total: usize) {
        let (c1, c2) = self.cutoffs;
        let mut dropped = 0.0;
        for n1 in 0..=c1 {
            for n2 in 0..=c2 {
                if n1 + n2 > max_total {
                    let i = n1 * (c2 + 1) + n2;
                    dropped += self.amplitudes[i].norm_sqr();
                    self.amplitudes[i] = czero();
                }
            }
        }
        self.norm_deficit += dropped;
    }
}

/// Normal-ordered monomial `coeff * b1^dag^p1 b1^q1 b2^dag^p2 b2^q2`.
#[derive(Debug, Clone, Copy)]
pub struct Monomial {
    pub coeff: C,
    pub create1: usize,
    pub annihilate1: usize,
    pub create2: usize,
    pub annihilate2: usize,
}

impl Monomial {
    pub fn new(coeff: C, create1: usize, annihilate1: usize, create2: usize, annihilate2: usize) -> Self {
        Self {
            coeff,
            create1,
            annihilate1,
            create2,
            annihilate2,
        }
    }
}

/// `ln( sqrt(n! / (n-q)!) * sqrt((n-q+p)! / (n-q)!) )`, or `None` if `q > n`.
fn ladder_log_weight(n: usize, create: usize, annihilate: usize) -> Option<(usize, f64)> {
    if annihilate > n {
        return None;
    }
    let mid = n - annihilate;
    let out = mid + create;
    let lw = 0.5 * (log_factorial(n as u64) - log_factorial(mid as u64))
        + 0.5 * (log_factorial(out as u64) - log_factorial(mid as u64));
    Some((out, lw))
}

/// Box-projected operator in compressed sparse row form.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    cutoffs: (usize, usize),
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C>,
}

impl SparseOperator {
    pub fn from_monomials(cutoffs: (usize, usize), terms: &[Monomial]) -> Self {
        let (c1, c2) = cutoffs;
        let dim = (c1 + 1) * (c2 + 1);
        let mut triplets: Vec<(usize, usize, C)> = Vec::new();
        for n1 in 0..=c1 {
            for n2 in 0..=c2 {
                let col = n1 * (c2 + 1) + n2;
                for t in terms {
                    let Some((m1, w1)) = ladder_log_weight(n1, t.create1, t.annihilate1) else {
                        continue;
                    };
                    let Some((m2, w2)) = ladder_log_weight(n2, t.create2, t.annihilate2) else {
                        continue;
                    };
                    if m1 > c1 || m2 > c2 {
                        continue;
                    }
                    triplets.push((m1 * (c2 + 1) + m2, col, t.coeff * (w1 + w2).exp()));
                }
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<C> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("merged entry exists") += v;
                continue;
            }
            cols.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            cutoffs,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        self.cutoffs
    }

    pub fn apply(&self, x: &[C]) -> Vec<C> {
        let mut y = vec![czero(); self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    fn apply_into(&self, x: &[C], y: &mut [C]) {
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = czero();
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0_f64; self.dim()];
        for (c, v) in self.cols.iter().zip(&self.values) {
            sums[*c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Dense entry lookup (tests and diagnostics).
    pub fn entry(&self, row: usize, col: usize) -> C {
        (self.row_ptr[row]..self.row_ptr[row + 1])
            .find(|&k| self.cols[k] == col)
            .map(|k| self.values[k])
            .unwrap_or_else(czero)
    }
}

/// `b1 b2^dag - b1^dag b2`.
pub fn rotation_generator(cutoffs: (usize, usize)) -> SparseOperator {
    let one = C::new(1.0, 0.0);
    SparseOperator::from_monomials(
        cutoffs,
        &[Monomial::new(one, 0, 1, 1, 0), Monomial::new(-one, 1, 0, 0, 1)],
    )
}

fn squeeze_terms(port: Port, zeta: &SqueezeParams, weight: f64) -> [Monomial; 2] {
    let u = zeta.unit_phase();
    let (a, b) = (u.conj() * 0.5 * weight, -u * 0.5 * weight);
    match port {
        Port::One => [Monomial::new(a, 0, 2, 0, 0), Monomial::new(b, 2, 0, 0, 0)],
        Port::Two => [Monomial::new(a, 0, 0, 0, 2), Monomial::new(b, 0, 0, 2, 0)],
    }
}

fn cross_squeeze_terms(zeta: &SqueezeParams, weight: f64) -> [Monomial; 2] {
    let u = zeta.unit_phase();
    [
        Monomial::new(u * weight, 1, 0, 1, 0),
        Monomial::new(-u.conj() * weight, 0, 1, 0, 1),
    ]
}

/// `(zeta* b_i^2 - zeta b_i^dag^2) / (2|zeta|)`.
pub fn squeeze_generator(cutoffs: (usize, usize), port: Port, zeta: &SqueezeParams) -> SparseOperator {
    SparseOperator::from_monomials(cutoffs, &squeeze_terms(port, zeta, 1.0))
}

/// `(zeta b1^dag b2^dag - zeta* b1 b2) / |zeta|`.
pub fn cross_squeeze_generator(cutoffs: (usize, usize), zeta: &SqueezeParams) -> SparseOperator {
    SparseOperator::from_monomials(cutoffs, &cross_squeeze_terms(zeta, 1.0))
}

/// `sin^2 g s1 + cos^2 g s2 + sin g cos g s12`.
pub fn output_generator(cutoffs: (usize, usize), zeta: &SqueezeParams, gamma: f64) -> SparseOperator {
    let (s, c) = gamma.sin_cos();
    let mut terms = Vec::with_capacity(6);
    terms.extend(squeeze_terms(Port::One, zeta, s * s));
    terms.extend(squeeze_terms(Port::Two, zeta, c * c));
    terms.extend(cross_squeeze_terms(zeta, s * c));
    SparseOperator::from_monomials(cutoffs, &terms)
}

/// Knobs for [`expm_action`].
#[derive(Debug, Clone, Copy)]
pub struct ExpmOptions {
    /// Largest `|t| * ||G||_1` per Taylor sub-step.
    pub step_norm: f64,
    /// Relative size of the last Taylor term kept.
    pub tolerance: f64,
    pub max_terms: usize,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        Self {
            step_norm: 1.0,
            tolerance: 1e-16,
            max_terms: 60,
        }
    }
}

/// `exp(t G) x` by sub-stepped Taylor series.
pub fn expm_action(op: &SparseOperator, t: f64, x: &[C], options: &ExpmOptions) -> Result<Vec<C>> {
    let norm = op.one_norm() * t.abs();
    let steps = ((norm / options.step_norm).ceil() as usize).max(1);
    let h = t / steps as f64;

    let mut current = x.to_vec();
    let mut term = vec![czero(); x.len()];
    let mut scratch = vec![czero(); x.len()];
    for _ in 0..steps {
        term.copy_from_slice(&current);
        let base = vec_norm(&current);
        let mut converged = base == 0.0;
        for k in 1..=options.max_terms {
            op.apply_into(&term, &mut scratch);
            let scale = h / k as f64;
            for (t_out, s) in term.iter_mut().zip(&scratch) {
                *t_out = s * scale;
            }
            for (c, t_in) in current.iter_mut().zip(&term) {
                *c += t_in;
            }
            if vec_norm(&term) <= options.tolerance * base {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                module: MODULE,
                iterations: options.max_terms,
                residual: vec_norm(&term) / base,
            });
        }
    }
    Ok(current)
}

fn vec_norm(v: &[C]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `U(gamma) |psi>` with `U = exp(gamma t12)`.
///
/// `U` conserves total photon number, so it is exact on components with
/// `n1 + n2 <= min(c1, c2)`; anything beyond is discarded first and counted
/// in the deficit.
pub fn beam_splitter_unitary_apply(state: &FockStateVector, gamma: f64) -> Result<FockStateVector> {
    let mut input = state.clone();
    input.project_total(state.cutoffs.0.min(state.cutoffs.1));
    let generator = rotation_generator(state.cutoffs);
    let amplitudes = expm_action(&generator, gamma, &input.amplitudes, &ExpmOptions::default())?;
    Ok(FockStateVector {
        amplitudes,
        cutoffs: state.cutoffs,
        norm_deficit: input.norm_deficit,
    })
}

/// Largest deviation of `U b_i U^dag` from `sum_j R_ij b_j` over a test
/// vector supported on low photon numbers, with `R` the beam-splitter matrix.
pub fn beam_splitter_convention_error(gamma: f64, cutoff: usize) -> Result<f64> {
    let cutoffs = (cutoff, cutoff);
    let low = cutoff / 2;
    let mut amplitudes = vec![czero(); (cutoff + 1) * (cutoff + 1)];
    for n1 in 0..=low {
        for n2 in 0..=(low - n1) {
            let phase = 0.37 * n1 as f64 - 0.91 * n2 as f64;
            let weight = 1.0 / (1.0 + (n1 + 2 * n2) as f64);
            amplitudes[n1 * (cutoff + 1) + n2] = C::from_polar(weight, phase);
        }
    }
    let generator = rotation_generator(cutoffs);
    let opts = ExpmOptions::default();
    let (s, c) = gamma.sin_cos();

    let b1 = two_mode_ladder(cutoffs, Port::One, false);
    let b2 = two_mode_ladder(cutoffs, Port::Two, false);
    let u_dag_psi = expm_action(&generator, -gamma, &amplitudes, &opts)?;

    let mut worst = 0.0_f64;
    for (port, coeffs) in [(Port::One, (c, s)), (Port::Two, (-s, c))] {
        let op = if port == Port::One { &b1 } else { &b2 };
        let lhs = expm_action(&generator, gamma, &op.apply(&u_dag_psi), &opts)?;
        let (x, y) = (b1.apply(&amplitudes), b2.apply(&amplitudes));
        let diff: f64 = lhs
            .iter()
            .zip(x.iter().zip(&y))
            .map(|(l, (p, q))| (l - (p * coeffs.0 + q * coeffs.1)).norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    Ok(worst)
}

fn two_mode_ladder(cutoffs: (usize, usize), port: Port, adjoint: bool) -> SparseOperator {
    let one = C::new(1.0, 0.0);
    let (cr, an) = if adjoint { (1, 0) } else { (0, 1) };
    let term = match port {
        Port::One => Monomial::new(one, cr, an, 0, 0),
        Port::Two => Monomial::new(one, 0, 0, cr, an),
    };
    SparseOperator::from_monomials(cutoffs, &[term])
}

/// Options for building oracle output states.
#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub cutoffs: (usize, usize),
    /// Fail when more probability than this is lost to truncation.
    pub leakage_threshold: f64,
}

impl OracleOptions {
    /// Equal per-mode cutoffs from [`required_cutoff`].
    pub fn for_params(alpha: &CoherentParams, zeta: &SqueezeParams) -> Self {
        let c = required_cutoff(alpha.magnitude(), zeta.r());
        Self {
            cutoffs: (c, c),
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
        }
    }

    pub fn with_cutoff(cutoff: usize) -> Self {
        Self {
            cutoffs: (cutoff, cutoff),
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
        }
    }
}

fn check_leakage(state: FockStateVector, threshold: f64) -> Result<FockStateVector> {
    if state.norm_deficit > threshold {
        Err(Error::Leakage {
            module: MODULE,
            leakage: state.norm_deficit,
            threshold,
        })
    } else {
        Ok(state)
    }
}

/// Beam-splitter output for a coherent state in port 1 and squeezed vacuum in port 2.
pub fn output_state(
    alpha: &CoherentParams,
    zeta: &SqueezeParams,
    gamma: f64,
    options: &OracleOptions,
) -> Result<FockStateVector> {
    let (c1, c2) = options.cutoffs;
    let input = FockStateVector::product(&coherent_fock(alpha, c1), &squeezed_vacuum_fock(zeta, c2));
    let out = beam_splitter_unitary_apply(&input, gamma)?;
    check_leakage(out, options.leakage_threshold)
}

/// The same output built the other way round: `exp(r A) D1(alpha cos g) D2(alpha sin g)|0,0>`.
pub fn output_state_direct(
    alpha: &CoherentParams,
    zeta: &SqueezeParams,
    gamma: f64,
    options: &OracleOptions,
) -> Result<FockStateVector> {
    let (c1, c2) = options.cutoffs;
    let (s, c) = gamma.sin_cos();
    let a = alpha.as_complex();
    let port1 = coherent_fock(&CoherentParams::from_complex(a * c)?, c1);
    let port2 = coherent_fock(&CoherentParams::from_complex(a * s)?, c2);
    let displaced = FockStateVector::product(&port1, &port2);
    let generator = output_generator(options.cutoffs, zeta, gamma);
    let amplitudes = expm_action(&generator, zeta.r(), &displaced.amplitudes, &ExpmOptions::default())?;
    let out = FockStateVector::from_amplitudes(amplitudes, options.cutoffs);
    check_leakage(out, options.leakage_threshold)
}

/// Photon-number distribution of one port, tracing out the other.
pub fn marginal_distribution(state: &FockStateVector, port: Port) -> PhotonDistribution {
    let (c1, c2) = state.cutoffs;
    let probabilities = match port {
        Port::One => (0..=c1)
            .map(|n1| compensated_sum((0..=c2).map(|n2| state.amplitude(n1, n2).norm_sqr())))
            .collect(),
        Port::Two => (0..=c2)
            .map(|n2| compensated_sum((0..=c1).map(|n1| state.amplitude(n1, n2).norm_sqr())))
            .collect(),
    };
    PhotonDistribution::with_residual(probabilities, state.norm_deficit)
}

/// Photon-number moments of one port from the marginal.
pub fn marginal_moments(state: &FockStateVector, port: Port) -> Moments {
    marginal_distribution(state, port).moments()
}

/// `tr(rho_port^2)` of the reduced state of one port.
pub fn reduced_purity(state: &FockStateVector, port: Port) -> f64 {
    let (c1, c2) = state.cutoffs;
    let (keep, trace) = match port {
        Port::One => (c1, c2),
        Port::Two => (c2, c1),
    };
    let amp = |k: usize, t: usize| match port {
        Port::One => state.amplitude(k, t),
        Port::Two => state.amplitude(t, k),
    };
    let mut purity = 0.0;
    for i in 0..=keep {
        for j in 0..=keep {
            let rho_ij: C = (0..=trace).map(|t| amp(i, t) * amp(j, t).conj()).sum();
            purity += rho_ij.norm_sqr();
        }
    }
    purity / state.norm_sqr().powi(2)
}

/// Quadrature means and symmetrised covariance in the ordering `(x1, p1, x2, p2)`.
pub fn quadrature_moments(state: &FockStateVector) -> (Vector4<f64>, Matrix4<f64>) {
    let cutoffs = state.cutoffs;
    let psi = &state.amplitudes;
    let norm = state.norm_sqr();

    // v = (b1, b2, b1^dag, b2^dag)
    let ladders = [
        two_mode_ladder(cutoffs, Port::One, false),
        two_mode_ladder(cutoffs, Port::Two, false),
        two_mode_ladder(cutoffs, Port::One, true),
        two_mode_ladder(cutoffs, Port::Two, true),
    ];
    let adjoint_index = [2, 3, 0, 1];
    let applied: Vec<Vec<C>> = ladders.iter().map(|op| op.apply(psi)).collect();
    let dot = |a: &[C], b: &[C]| -> C { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };

    let first: Vec<C> = applied.iter().map(|v| dot(psi, v) / norm).collect();
    // <v_l v_n> = <v_l^dag psi | v_n psi>
    let second = Matrix4::from_fn(|l, n| dot(&applied[adjoint_index[l]], &applied[n]) / norm);

    let root2 = std::f64::consts::SQRT_2;
    let i = C::new(0.0, 1.0);
    let one = C::new(1.0, 0.0);
    let zero = czero();
    // rows: x1, p1, x2, p2 in terms of v
    #[rustfmt::skip]
    let coeffs = Matrix4::new(
        one, zero, one, zero,
        -i, zero, i, zero,
        zero, one, zero, one,
        zero, -i, zero, i,
    ) / C::new(root2, 0.0);

    let first_v = Vector4::from_iterator(first);
    let mean_c = coeffs * first_v;
    let raw = coeffs * second * coeffs.transpose();
    let mean = mean_c.map(|z| z.re);
    let cov = Matrix4::from_fn(|k, m| 0.5 * (raw[(k, m)].re + raw[(m, k)].re) - mean[k] * mean[m]);
    (mean, cov)
}
