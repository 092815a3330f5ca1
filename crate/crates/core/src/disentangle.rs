//! Disentangling coefficients of the beam-splitter output operator.
//!
//! The output state is `exp(r A)` applied to a product of coherent states, with
//! `A = sin^2(g) s1 + cos^2(g) s2 + sin(g)cos(g) s12`. We rewrite `exp(r A)` as
//! the ordered product
//!
//! ```text
//! exp(sigma_T t12) exp(sigma_S s12) exp(sigma_1 s1) exp(sigma_2 s2)
//! ```
//!
//! by matching group elements in the adjoint representation on the span of
//! `(b1, b2, b1^dag, b2^dag)`. Every operator here is quadratic, so the
//! commutator action closes on that span and the matching is a 4x4 problem.
//!
//! Matrices use the linear-map convention `[K, v_j] = sum_i N_ij v_i`, which
//! makes `exp(K1) exp(K2) -> exp(N1) exp(N2)` order-preserving.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::SqueezeParams;

type CMatrix4 = Matrix4<Complex64>;

const MODULE: &str = "disentangle";

/// Largest squeezing factor for which the 4x4 matching is well conditioned.
pub const MAX_R: f64 = 5.0;

/// Quadratic operators appearing in the output state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorLabel {
    /// `(zeta* b1^2 - zeta b1^dag^2) / (2|zeta|)`
    S1,
    /// `(zeta* b2^2 - zeta b2^dag^2) / (2|zeta|)`
    S2,
    /// `(zeta b1^dag b2^dag - zeta* b1 b2) / |zeta|`
    S12,
    /// `b1 b2^dag - b1^dag b2`
    T12,
    /// `sin^2 g S1 + cos^2 g S2 + sin g cos g S12`
    A,
}

/// Adjoint-action matrix of one quadratic operator.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGenerator {
    pub label: GeneratorLabel,
    pub matrix: CMatrix4,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn basis_matrix(label: GeneratorLabel, phase: Complex64) -> CMatrix4 {
    let u = phase;
    let uc = phase.conj();
    let mut m = CMatrix4::zeros();
    match label {
        GeneratorLabel::S1 => {
            m[(2, 0)] = u;
            m[(0, 2)] = uc;
        }
        GeneratorLabel::S2 => {
            m[(3, 1)] = u;
            m[(1, 3)] = uc;
        }
        GeneratorLabel::S12 => {
            m[(3, 0)] = -u;
            m[(2, 1)] = -u;
            m[(1, 2)] = -uc;
            m[(0, 3)] = -uc;
        }
        GeneratorLabel::T12 => {
            m[(1, 0)] = c(1.0);
            m[(0, 1)] = c(-1.0);
            m[(3, 2)] = c(1.0);
            m[(2, 3)] = c(-1.0);
        }
        GeneratorLabel::A => unreachable!("A is assembled from the basis"),
    }
    m
}

/// Adjoint matrix of `label`; `gamma` only matters for [`GeneratorLabel::A`].
pub fn adjoint_matrix(label: GeneratorLabel, zeta: &SqueezeParams, gamma: f64) -> QuadraticGenerator {
    let u = zeta.unit_phase();
    let matrix = match label {
        GeneratorLabel::A => {
            let (s, co) = gamma.sin_cos();
            basis_matrix(GeneratorLabel::S1, u) * c(s * s)
                + basis_matrix(GeneratorLabel::S2, u) * c(co * co)
                + basis_matrix(GeneratorLabel::S12, u) * c(s * co)
        }
        other => basis_matrix(other, u),
    };
    QuadraticGenerator { label, matrix }
}

/// Coefficients of the ordered product `t12, s12, s1, s2` (leftmost first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisentangleCoeffs {
    pub sigma_t: f64,
    pub sigma_s: f64,
    pub sigma_1: f64,
    pub sigma_2: f64,
}

impl DisentangleCoeffs {
    fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.sigma_t, self.sigma_s, self.sigma_1, self.sigma_2)
    }

    fn from_vector(v: &Vector4<f64>) -> Self {
        Self {
            sigma_t: v[0],
            sigma_s: v[1],
            sigma_1: v[2],
            sigma_2: v[3],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.to_vector() - other.to_vector()).amax()
    }
}

/// Numerically matched coefficients and the achieved Frobenius residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disentangled {
    pub coeffs: DisentangleCoeffs,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Residual at which a solve is accepted.
    pub tolerance: f64,
    /// Iteration budget per continuation step.
    pub max_iterations: usize,
    /// Largest change of `gamma` between continuation steps.
    pub continuation_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 200,
            continuation_step: 0.02,
        }
    }
}

/// The ordered product of exponentials in matrix form.
pub fn ordered_product(zeta: &SqueezeParams, coeffs: &DisentangleCoeffs) -> CMatrix4 {
    let basis = Basis::new(zeta);
    let e = basis.exponentials(&coeffs.to_vector());
    e[0] * e[1] * e[2] * e[3]
}

/// `exp(r M(A))` at splitter angle `gamma`.
pub fn target(zeta: &SqueezeParams, gamma: f64) -> CMatrix4 {
    (adjoint_matrix(GeneratorLabel::A, zeta, gamma).matrix * c(zeta.r())).exp()
}

/// The first-order dark-port law `sigma_1 = r`, `sigma_2 = 0`,
/// `sigma_S = -delta sinh r`, `sigma_T = delta (1 - cosh r)`.
///
/// Expanding the ordered product against `exp(r A)` shows this law holds for
/// `gamma = pi/2 + delta`; at `gamma = pi/2 - delta` the signs of `sigma_S`
/// and `sigma_T` flip. The solver seeds with `first_order_coeffs(zeta, gamma - pi/2)`.
pub fn first_order_coeffs(zeta: &SqueezeParams, delta: f64) -> DisentangleCoeffs {
    let r = zeta.r();
    DisentangleCoeffs {
        sigma_t: delta * (1.0 - r.cosh()),
        sigma_s: -delta * r.sinh(),
        sigma_1: r,
        sigma_2: 0.0,
    }
}

pub fn disentangle(zeta: &SqueezeParams, gamma: f64) -> Result<Disentangled> {
    disentangle_with(zeta, gamma, &SolverOptions::default())
}

/// Solve for the coefficients by continuation from the nearer exact endpoint
/// (`gamma = pi/2`: pure `s1`; `gamma = 0`: pure `s2`).
pub fn disentangle_with(zeta: &SqueezeParams, gamma: f64, options: &SolverOptions) -> Result<Disentangled> {
    if zeta.r() > MAX_R {
        return Err(Error::invalid("r", format!("must not exceed {MAX_R} for disentangling")));
    }
    if !(0.0..=FRAC_PI_2).contains(&gamma) {
        return Err(Error::invalid("gamma", format!("must lie in [0, pi/2], got {gamma}")));
    }
    let r = zeta.r();
    let basis = Basis::new(zeta);

    let (start, mut guess) = if gamma >= FRAC_PI_2 / 2.0 {
        (FRAC_PI_2, Vector4::new(0.0, 0.0, r, 0.0))
    } else {
        (0.0, Vector4::new(0.0, 0.0, 0.0, r))
    };

    let span = gamma - start;
    let steps = ((span.abs() / options.continuation_step).ceil() as usize).max(1);
    let mut previous = guess;
    let mut total_iterations = 0;
    let mut last = None;

    for k in 1..=steps {
        let g = start + span * k as f64 / steps as f64;
        if k == 1 && start == FRAC_PI_2 {
            guess = first_order_coeffs(zeta, g - FRAC_PI_2).to_vector();
        }
        let goal = target(zeta, g);
        let solved = solve_point(&basis, &goal, guess, options)?;
        total_iterations += solved.iterations;

        // linear extrapolation along the path
        let next_guess = 2.0 * solved.x - previous;
        previous = solved.x;
        guess = if k == 1 { solved.x } else { next_guess };
        last = Some(solved);
    }

    let solved = last.expect("at least one continuation step");
    Ok(Disentangled {
        coeffs: DisentangleCoeffs::from_vector(&solved.x),
        residual: solved.residual,
        iterations: total_iterations,
    })
}

struct Basis {
    generators: [CMatrix4; 4],
}

impl Basis {
    fn new(zeta: &SqueezeParams) -> Self {
        let u = zeta.unit_phase();
        Self {
            generators: [
                basis_matrix(GeneratorLabel::T12, u),
                basis_matrix(GeneratorLabel::S12, u),
                basis_matrix(GeneratorLabel::S1, u),
                basis_matrix(GeneratorLabel::S2, u),
            ],
        }
    }

    fn exponentials(&self, x: &Vector4<f64>) -> [CMatrix4; 4] {
        std::array::from_fn(|k| (self.generators[k] * c(x[k])).exp())
    }

    fn residual(&self, x: &Vector4<f64>, goal: &CMatrix4) -> f64 {
        let e = self.exponentials(x);
        (e[0] * e[1] * e[2] * e[3] - goal).norm()
    }
}

struct PointSolution {
    x: Vector4<f64>,
    residual: f64,
    iterations: usize,
}

fn solve_point(
    basis: &Basis,
    goal: &CMatrix4,
    guess: Vector4<f64>,
    options: &SolverOptions,
) -> Result<PointSolution> {
    let lm = levenberg_marquardt(basis, goal, guess, options);
    if lm.residual <= options.tolerance {
        return Ok(lm);
    }
    // derivative-free fallback, then polish
    let nm = nelder_mead(basis, goal, lm.x, options.max_iterations * 20);
    let polished = levenberg_marquardt(basis, goal, nm, options);
    let iterations = lm.iterations + polished.iterations;
    if polished.residual <= options.tolerance.max(1e-10) {
        Ok(PointSolution {
            iterations,
            ..polished
        })
    } else {
        Err(Error::NonConvergence {
            module: MODULE,
            iterations,
            residual: polished.residual,
        })
    }
}

fn levenberg_marquardt(
    basis: &Basis,
    goal: &CMatrix4,
    mut x: Vector4<f64>,
    options: &SolverOptions,
) -> PointSolution {
    let mut lambda = 1e-6;
    let mut current = basis.residual(&x, goal);
    let mut iterations = 0;

    while iterations < options.max_iterations && current > options.tolerance {
        iterations += 1;
        let e = basis.exponentials(&x);
        let product = e[0] * e[1] * e[2] * e[3];
        let diff = product - goal;

        let g = &basis.generators;
        let derivs = [
            g[0] * product,
            e[0] * g[1] * e[1] * e[2] * e[3],
            e[0] * e[1] * g[2] * e[2] * e[3],
            product * g[3],
        ];

        // Normal equations over the 32 real residual components.
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtf = Vector4::<f64>::zeros();
        for a in 0..4 {
            for b in 0..4 {
                jtj[(a, b)] = derivs[a]
                    .iter()
                    .zip(derivs[b].iter())
                    .map(|(p, q)| p.re * q.re + p.im * q.im)
                    .sum();
            }
            jtf[a] = derivs[a]
                .iter()
                .zip(diff.iter())
                .map(|(p, f)| p.re * f.re + p.im * f.im)
                .sum();
        }

        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for k in 0..4 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtf)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = x + step;
            let value = basis.residual(&trial, goal);
            if value < current {
                x = trial;
                current = value;
                lambda = (lambda * 0.3).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }

    PointSolution {
        x,
        residual: current,
        iterations,
    }
}

fn nelder_mead(basis: &Basis, goal: &CMatrix4, start: Vector4<f64>, max_evals: usize) -> Vector4<f64> {
    let f = |x: &Vector4<f64>| basis.residual(x, goal);
    let mut simplex: Vec<(Vector4<f64>, f64)> = (0..5)
        .map(|k| {
            let mut p = start;
            if k > 0 {
                p[k - 1] += 0.05 * p[k - 1].abs().max(0.1);
            }
            (p, f(&p))
        })
        .collect();

    let mut evals = simplex.len();
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[4].1 - simplex[0].1 < 1e-16 {
            break;
        }
        let centroid = simplex[..4].iter().map(|(p, _)| p).sum::<Vector4<f64>>() / 4.0;
        let worst = simplex[4];

        let reflected = centroid + (centroid - worst.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < simplex[0].1 {
            let expanded = centroid + 2.0 * (centroid - worst.0);
            let fe = f(&expanded);
            evals += 1;
            simplex[4] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[3].1 {
            simplex[4] = (reflected, fr);
        } else {
            let contracted = centroid + 0.5 * (worst.0 - centroid);
            let fc = f(&contracted);
            evals += 1;
            if fc < worst.1 {
                simplex[4] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    entry.0 = best + 0.5 * (entry.0 - best);
                    entry.1 = f(&entry.0);
                }
                evals += 4;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].0
}
