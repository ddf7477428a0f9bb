//! Partial Euler products `Π_n(z) = ∏_{j=1}^n (1 + z/j)`, the Lanczos
//! gamma function, and the product-form MGF / CF of `Z_n`.
//!
//! Products are accumulated as (log-magnitude, argument) pairs; raw
//! magnitudes of `Π_n(e(it))` underflow long before `n = 10^7`.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;

use crate::colors::IncrementModel;
use crate::error::{Result, UrnError};
use crate::numeric::CompensatedSum;

/// A complex number stored as `exp(log_mag + i·arg)`, `arg ∈ (-π, π]`.
/// Zero is `log_mag = -∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogComplex {
    pub log_mag: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex { log_mag: 0.0, arg: 0.0 };
    pub const ZERO: LogComplex = LogComplex { log_mag: f64::NEG_INFINITY, arg: 0.0 };

    pub fn new(log_mag: f64, arg: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex { log_mag, arg: wrap_angle(arg) }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Self::ZERO;
        }
        LogComplex::new(z.norm().ln(), z.arg())
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn abs(&self) -> f64 {
        self.log_mag.exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mag.exp(), self.arg)
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;

    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.log_mag + rhs.log_mag, self.arg + rhs.arg)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Accumulates `∏ factor(j)` over `j = 1..=n` in log space with compensated
/// sums on both the log-magnitude and the argument.
fn log_product(n: u64, mut factor: impl FnMut(u64) -> Complex64) -> LogComplex {
    let mut mag = CompensatedSum::new();
    let mut arg = CompensatedSum::new();
    for j in 1..=n {
        let f = factor(j);
        if f == Complex64::new(0.0, 0.0) {
            return LogComplex::ZERO;
        }
        mag.add(f.norm().ln());
        arg.add(f.arg());
    }
    LogComplex::new(mag.value(), arg.value())
}

/// `Π_n(z)` for complex `z`. Poles `z ∈ {-1, …, -n}` return the zero sentinel.
pub fn pi_n(z: Complex64, n: u64) -> LogComplex {
    if z.im == 0.0 {
        // real fast path keeps ln_1p accuracy for tiny z/j
        return pi_n_real_signed(z.re, n);
    }
    log_product(n, |j| Complex64::new(1.0, 0.0) + z / j as f64)
}

/// `∏ (1 + r_j)` over `j = 1..=n` for real ratios `r_j`, tracking the sign
/// of negative factors in the argument.
fn real_log_product(n: u64, ratio: impl Fn(u64) -> f64) -> LogComplex {
    let mut mag = CompensatedSum::new();
    let mut negatives = 0u64;
    for j in 1..=n {
        let r = ratio(j);
        if r == -1.0 {
            return LogComplex::ZERO;
        }
        if r < -1.0 {
            negatives += 1;
        }
        if r > -0.5 {
            mag.add(r.ln_1p());
        } else {
            mag.add((1.0 + r).abs().ln());
        }
    }
    LogComplex::new(mag.value(), if negatives % 2 == 1 { PI } else { 0.0 })
}

fn pi_n_real_signed(z: f64, n: u64) -> LogComplex {
    real_log_product(n, |j| z / j as f64)
}

/// `ln Π_n(z)` for real `z > -1`, via `ln_1p`.
pub fn log_pi_n_real(z: f64, n: u64) -> f64 {
    debug_assert!(z > -1.0);
    let mut s = CompensatedSum::new();
    for j in 1..=n {
        s.add((z / j as f64).ln_1p());
    }
    s.value()
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, `g = 7`, nine coefficients).
pub fn ln_gamma_lanczos(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_lanczos(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `Γ(x)` on `(0, 50]`.
pub fn gamma_real(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 50.0) {
        return Err(UrnError::DomainError(x));
    }
    if x == x.floor() && x <= 20.0 {
        // exact factorials
        return Ok((1..x as u64).map(|k| k as f64).product());
    }
    Ok(ln_gamma_lanczos(x).exp())
}

/// `Π_n(z) Γ(z+1) / n^z` for real `z > -1`; tends to 1 as `n → ∞`.
pub fn gauss_ratio(z: f64, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(UrnError::TimeTooSmall { n, min: 2 });
    }
    let arg = z + 1.0;
    if arg <= 0.0 && arg == arg.floor() {
        return Err(UrnError::GammaPole(arg));
    }
    if !(arg > 0.0 && arg <= 50.0) {
        return Err(UrnError::DomainError(arg));
    }
    let log_ratio = log_pi_n_real(z, n) + ln_gamma_lanczos(arg) - z * (n as f64).ln();
    Ok(log_ratio.exp())
}

/// `ln ∏_{j=1}^n (1 - 1/(j+1) + e/(j+1))` for a real MGF value `e > 0`.
pub fn log_mgf_product(e: f64, n: u64) -> f64 {
    let d = e - 1.0;
    let mut s = CompensatedSum::new();
    for j in 1..=n {
        s.add((d / (j + 1) as f64).ln_1p());
    }
    s.value()
}

/// `∏_{j=1}^n (1 - 1/(j+1) + e/(j+1))` for a complex CF value `e`.
pub fn cf_product(e: Complex64, n: u64) -> LogComplex {
    let d = e - 1.0;
    if d.im == 0.0 {
        return pi_n_real_shifted(d.re, n);
    }
    log_product(n, |j| Complex64::new(1.0, 0.0) + d / (j + 1) as f64)
}

fn pi_n_real_shifted(d: f64, n: u64) -> LogComplex {
    real_log_product(n, |j| d / (j + 1) as f64)
}

/// Log of the exact MGF of `Z_n`:
/// `M̄_0(λ) ∏_{j=1}^n (1 - 1/(j+1) + e(λ)/(j+1))`.
pub fn mgf_zn(model: &IncrementModel, u0_mgf_at: impl Fn(&[f64]) -> f64, lambda: &[f64], n: u64) -> f64 {
    u0_mgf_at(lambda).ln() + log_mgf_product(model.mgf(lambda), n)
}

/// Exact characteristic function of `Z_n` in embedded coordinates.
pub fn cf_zn(model: &IncrementModel, u0_cf_at: impl Fn(&[f64]) -> Complex64, t: &[f64], n: u64) -> LogComplex {
    LogComplex::from_complex(u0_cf_at(t)) * cf_product(model.cf(t), n)
}

/// Characteristic function of the coefficient vector of `Z_n`, periodic in
/// each coordinate with period `2π`.
pub fn cf_zn_coeffs(model: &IncrementModel, u0_cf_at: impl Fn(&[f64]) -> Complex64, t: &[f64], n: u64) -> LogComplex {
    LogComplex::from_complex(u0_cf_at(t)) * cf_product(model.cf_coeffs(t), n)
}
