//! Error-function helpers.
//!
//! `erf`/`erfc` come from `libm` (the FreeBSD msun port, accurate to below one
//! ulp). The helpers here only arrange the arithmetic so that differences of
//! error functions near 1 do not cancel.

use std::f64::consts::PI;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `erf(y) - erf(x)` without cancellation when both arguments are large.
pub fn erf_diff(y: f64, x: f64) -> f64 {
    if x > 0.5 && y > 0.5 {
        erfc(x) - erfc(y)
    } else if x < -0.5 && y < -0.5 {
        erfc(-y) - erfc(-x)
    } else {
        erf(y) - erf(x)
    }
}

/// `erf(x) - 1`, computed as `-erfc(x)`.
#[inline]
pub fn erf_minus_one(x: f64) -> f64 {
    -erfc(x)
}

/// Derivative of `erf`.
#[inline]
pub fn erf_prime(x: f64) -> f64 {
    2.0 / PI.sqrt() * (-x * x).exp()
}
