//! Scalar root finding on bracketed, monotone functions.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket. Stops when the bracket is narrower
/// than `xtol` or the function vanishes exactly.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoRoot {
            lo,
            hi,
            context: format!("no sign change (f(lo)={flo:e}, f(hi)={fhi:e})"),
        });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Newton iteration kept inside a bracket `[lo, hi]` with a sign change;
/// any Newton step that leaves the bracket (or converges too slowly) is
/// replaced by bisection. `f` returns `(value, derivative)`.
///
/// Terminates when `|f| <= ftol` or the bracket collapses to `xtol`.
pub fn safeguarded_newton<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    ftol: f64,
    xtol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoRoot {
            lo,
            hi,
            context: format!("no sign change (f(lo)={flo:e}, f(hi)={fhi:e})"),
        });
    }
    // orient so that f(lo) < 0 < f(hi)
    let increasing = flo < 0.0;
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut last_step = hi - lo;
    let mut best = x;
    let mut best_abs = f64::INFINITY;
    for _ in 0..400 {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(Error::Domain(format!("function not finite at {x}")));
        }
        if fx.abs() < best_abs {
            best_abs = fx.abs();
            best = x;
        }
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if (fx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= xtol {
            return Ok(best);
        }
        let newton = if dfx != 0.0 && dfx.is_finite() {
            x - fx / dfx
        } else {
            f64::NAN
        };
        let step = (newton - x).abs();
        let next = if newton > lo && newton < hi && step < 0.5 * last_step {
            last_step = step;
            newton
        } else {
            last_step = hi - lo;
            0.5 * (lo + hi)
        };
        if next == x {
            return Ok(best);
        }
        x = next;
    }
    Ok(best)
}
