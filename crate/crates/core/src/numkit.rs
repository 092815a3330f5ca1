//! Special-function kernels that stay finite at large photon numbers.
//!
//! Amplitudes of squeezed coherent states involve `H_n(z)` and `1/sqrt(n!)`
//! at `n` of several hundred, far outside `f64` range in linear scale. Values
//! are therefore carried as [`LogScaledComplex`] (log-magnitude plus phase).

use std::f64::consts::PI;
use std::ops::Mul;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let mut p = angle.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// A complex number stored as `exp(log_magnitude) * exp(i * phase)`.
///
/// `log_magnitude == -inf` is exact zero and always carries phase 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaledComplex {
    log_magnitude: f64,
    phase: f64,
}

impl LogScaledComplex {
    pub const ZERO: Self = Self {
        log_magnitude: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: Self = Self {
        log_magnitude: 0.0,
        phase: 0.0,
    };

    pub fn new(log_magnitude: f64, phase: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                log_magnitude,
                phase: wrap_phase(phase),
            }
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            Self::new(z.norm().ln(), z.arg())
        }
    }

    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// `ln |z|^2`.
    pub fn log_norm_sqr(&self) -> f64 {
        2.0 * self.log_magnitude
    }

    /// Multiply by `exp(log_factor)` for a real `log_factor`.
    pub fn scale_log(self, log_factor: f64) -> Self {
        if self.is_zero() {
            self
        } else {
            Self::new(self.log_magnitude + log_factor, self.phase)
        }
    }

    /// Back to linear scale; overflows to infinity / underflows to zero like `exp`.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.log_magnitude.exp(), self.phase)
        }
    }

    /// Linear-scale value relative to a reference log-magnitude, i.e. `z * exp(-reference)`.
    pub fn to_complex_relative(&self, reference: f64) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar((self.log_magnitude - reference).exp(), self.phase)
        }
    }
}

impl Mul for LogScaledComplex {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            Self::ZERO
        } else {
            Self::new(
                self.log_magnitude + rhs.log_magnitude,
                self.phase + rhs.phase,
            )
        }
    }
}

const LOG_FACTORIAL_TABLE_LEN: usize = 256;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LOG_FACTORIAL_TABLE_LEN);
        let mut acc = 0.0_f64;
        table.push(0.0);
        for k in 1..LOG_FACTORIAL_TABLE_LEN {
            acc += (k as f64).ln();
            table.push(acc);
        }
        table
    })
}

/// `ln(n!)`.
///
/// Exact log-sums below 256, Stirling series with four correction terms above
/// (truncation error < 1e-22 there).
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) < LOG_FACTORIAL_TABLE_LEN {
        return log_factorial_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + series
}

/// `ln(exp(-mean) mean^n / n!)`; `mean = 0` gives the point mass at `n = 0`.
pub fn poisson_log_pmf(mean: f64, n: u64) -> f64 {
    if mean == 0.0 {
        if n == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        -mean + n as f64 * mean.ln() - log_factorial(n)
    }
}

// Rescale the recurrence pair once its magnitude leaves [1e-150, 1e150].
const RESCALE_HIGH: f64 = 1e150;
const RESCALE_LOW: f64 = 1e-150;

/// Physicists' Hermite polynomials `H_0(z) ..= H_{n_max}(z)` in log-scaled form.
///
/// Forward three-term recurrence `H_{k+1} = 2z H_k - 2k H_{k-1}` with the
/// running pair renormalised whenever it drifts out of a safe window.
pub fn hermite_scaled_sequence(n_max: usize, z: Complex64) -> Vec<LogScaledComplex> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(LogScaledComplex::ONE);
    if n_max == 0 {
        return out;
    }

    let two_z = 2.0 * z;
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = two_z;
    let mut log_scale = 0.0;
    out.push(LogScaledComplex::from_complex(cur));

    for k in 1..n_max {
        let next = two_z * cur - (2.0 * k as f64) * prev;
        prev = cur;
        cur = next;

        let size = prev.norm().max(cur.norm());
        if size > RESCALE_HIGH || (size < RESCALE_LOW && size > 0.0) {
            prev /= size;
            cur /= size;
            log_scale += size.ln();
        }
        out.push(LogScaledComplex::from_complex(cur).scale_log(log_scale));
    }
    out
}

/// Solution of `g_{n+1} = (a g_n - b sqrt(n) g_{n-1}) / sqrt(n+1)` with
/// `g_0 = 1`, `g_1 = a`, in log-scaled form.
///
/// With `a = 2 z t` and `b = 2 t^2` this is `H_n(z) t^n / sqrt(n!)`; with
/// `b = 0` it is `a^n / sqrt(n!)`. No factorials or large logarithms are
/// formed, and rescaling uses exact powers of two, so relative accuracy
/// stays near `n` ulps.
pub fn normalized_hermite_sequence(n_max: usize, a: Complex64, b: Complex64) -> Vec<LogScaledComplex> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(LogScaledComplex::ONE);
    if n_max == 0 {
        return out;
    }
    let mut prev = Complex64::new(1.0, 0.0);
    let mut cur = a;
    let mut exponent2: i64 = 0;
    out.push(LogScaledComplex::from_complex(cur));
    for k in 1..n_max {
        let kf = k as f64;
        let next = (a * cur - b * kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;

        let size = prev.norm().max(cur.norm());
        if size > RESCALE_HIGH || (size < RESCALE_LOW && size > 0.0) {
            let shift = size.log2().round() as i32;
            let factor = 2.0_f64.powi(-shift);
            prev *= factor;
            cur *= factor;
            exponent2 += i64::from(shift);
        }
        out.push(LogScaledComplex::from_complex(cur).scale_log(exponent2 as f64 * std::f64::consts::LN_2));
    }
    out
}

/// `H_n(z)` in log-scaled form.
pub fn hermite_scaled(n: usize, z: Complex64) -> LogScaledComplex {
    *hermite_scaled_sequence(n, z)
        .last()
        .expect("sequence always holds H_0")
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}
