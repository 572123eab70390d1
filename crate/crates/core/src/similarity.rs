//! Closed-form self-similar profiles of `U'' + (w/2) D(U) U' = 0`,
//! `w = x / sqrt(t)`, for the three integrable diffusivities:
//!
//! | `D(U)`          | profile                                                     |
//! |-----------------|-------------------------------------------------------------|
//! | `a^2`           | `U = C2 + C1 sqrt(pi)/a erf(a w / 2)`                        |
//! | `a^2 / U^2`     | `U = C1 (sqrt(pi)/2 erf(tau) + C2)`, `w = (2 tau U + C1 e^{-tau^2}) / a` |
//! | `b^2 e^U`       | `U = int ds / g(s) + C`, `w = nu e^{-U/2}`, `g` implicit      |
//!
//! The parametric families are evaluated at a given `w` by inverting the
//! strictly increasing map `parameter -> w`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::material::{DiffusivityKind, MaterialModel, Phase, TransformedProblem};
use crate::quad::{integrate, integrate_tail, TailEstimate, Tolerance};
use crate::roots::safeguarded_newton;
use crate::special::{erf, erf_diff, erfc, SQRT_PI};

/// Fraction of the solved parameter span added on each side of a
/// parametric profile's working range.
pub const RANGE_MARGIN: f64 = 0.1;

/// Quadrature tolerances for `int dnu / g`.
pub const G_QUAD_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-10,
};

/// Tail truncation: stop once the integrand falls below this fraction of
/// the accumulated integral.
pub const TAIL_CUTOFF: f64 = 1e-14;

/// ODE residual at one point together with the magnitude of its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn scaled(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

fn ode_residual_from_derivatives(omega: f64, d: f64, slope: f64, curvature: f64) -> Residual {
    let drift = 0.5 * omega * d * slope;
    Residual {
        value: curvature + drift,
        scale: curvature.abs().max(drift.abs()),
    }
}

// ---------------------------------------------------------------------------
// erf family

/// `U(w) = c2 + c1 sqrt(pi)/coeff erf(coeff w / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErfProfile {
    pub c1: f64,
    pub c2: f64,
    pub coeff: f64,
}

impl ErfProfile {
    pub fn value(&self, omega: f64) -> f64 {
        self.c2 + self.c1 * SQRT_PI / self.coeff * erf(0.5 * self.coeff * omega)
    }

    pub fn slope(&self, omega: f64) -> f64 {
        let z = 0.5 * self.coeff * omega;
        self.c1 * (-z * z).exp()
    }

    pub fn curvature(&self, omega: f64) -> f64 {
        -0.5 * self.coeff * self.coeff * omega * self.slope(omega)
    }

    /// Value as `w -> inf`.
    pub fn limit(&self) -> f64 {
        self.c2 + self.c1 * SQRT_PI / self.coeff
    }
}

/// Evaluates an erf profile; total on the reals.
pub fn eval_erf(profile: &ErfProfile, omega: f64) -> f64 {
    profile.value(omega)
}

fn const_coeff(kind: DiffusivityKind, what: &str) -> Result<f64> {
    match kind {
        DiffusivityKind::ConstDiff { coeff } => Ok(coeff),
        other => Err(Error::Domain(format!(
            "{what} needs a constant diffusivity, got {}",
            other.name()
        ))),
    }
}

/// Liquid erf profile through `(w1, U1)` and `(w2, U2)`.
pub fn fit_erf_liquid(p: &TransformedProblem, omega1: f64, omega2: f64) -> Result<ErfProfile> {
    let a = const_coeff(p.liquid_kind, "fit_erf_liquid")?;
    if !(omega1 > 0.0 && omega2 > omega1) {
        return Err(Error::Domain(format!(
            "need 0 < w1 < w2, got w1={omega1}, w2={omega2}"
        )));
    }
    let (u1, u2) = (p.u_evaporation, p.u_melting);
    let e1 = erf(0.5 * a * omega1);
    let delta = erf_diff(0.5 * a * omega2, 0.5 * a * omega1);
    if delta == 0.0 {
        return Err(Error::SingularFit(format!(
            "erf(a w2/2) = erf(a w1/2) for a={a}, w1={omega1}, w2={omega2}"
        )));
    }
    let c1 = a / SQRT_PI * (u2 - u1) / delta;
    let c2 = u1 - (u2 - u1) * e1 / delta;
    Ok(ErfProfile { c1, c2, coeff: a })
}

/// Solid erf profile with `V(w2) = V2` and `V(inf) = V0`.
pub fn fit_erf_solid(p: &TransformedProblem, omega2: f64) -> Result<ErfProfile> {
    let b = const_coeff(p.solid_kind, "fit_erf_solid")?;
    if !(omega2 > 0.0) {
        return Err(Error::Domain(format!("need w2 > 0, got {omega2}")));
    }
    let (v2, v0) = (p.v_melting, p.v_far);
    let tail = erfc(0.5 * b * omega2);
    if tail < f64::EPSILON {
        return Err(Error::SingularFit(format!(
            "erf(b w2/2) = 1 to machine precision (b={b}, w2={omega2})"
        )));
    }
    let c3 = -b / SQRT_PI * (v2 - v0) / tail;
    let c4 = v0 + (v2 - v0) / tail;
    Ok(ErfProfile {
        c1: c3,
        c2: c4,
        coeff: b,
    })
}

// ---------------------------------------------------------------------------
// parametric power family (D = a^2 / U^2)

/// `U(tau) = c1 (sqrt(pi)/2 erf(tau) + c2)`, `w(tau) = (2 tau U + c1 e^{-tau^2}) / coeff`,
/// restricted to `[tau_lo, tau_hi]` (`tau_hi` may be infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParametricPowerProfile {
    pub c1: f64,
    pub c2: f64,
    pub coeff: f64,
    pub tau_lo: f64,
    pub tau_hi: f64,
}

impl ParametricPowerProfile {
    fn raw_value(&self, tau: f64) -> f64 {
        self.c1 * (0.5 * SQRT_PI * erf(tau) + self.c2)
    }

    fn raw_omega(&self, tau: f64, u: f64) -> f64 {
        (2.0 * tau * u + self.c1 * (-tau * tau).exp()) / self.coeff
    }

    fn check(&self, tau: f64) -> Result<f64> {
        if !(tau >= self.tau_lo && tau <= self.tau_hi) {
            return Err(Error::Domain(format!(
                "tau = {tau} outside working range [{}, {}]",
                self.tau_lo, self.tau_hi
            )));
        }
        let u = self.raw_value(tau);
        if !(u > 0.0) {
            return Err(Error::MonotonicityDomain(format!("U(tau = {tau}) = {u} <= 0")));
        }
        Ok(u)
    }

    /// `(w, U)` at parameter `tau`.
    pub fn eval(&self, tau: f64) -> Result<(f64, f64)> {
        let u = self.check(tau)?;
        Ok((self.raw_omega(tau, u), u))
    }

    /// `dw/dtau = 2 U / coeff`.
    pub fn omega_rate(&self, tau: f64) -> Result<f64> {
        Ok(2.0 * self.check(tau)? / self.coeff)
    }

    /// `dU/dw` at parameter `tau`, by the chain rule.
    pub fn slope(&self, tau: f64) -> Result<f64> {
        let u = self.check(tau)?;
        let du = self.c1 * (-tau * tau).exp();
        Ok(du / (2.0 * u / self.coeff))
    }

    /// `d2U/dw2` at parameter `tau`.
    pub fn curvature(&self, tau: f64) -> Result<f64> {
        let u = self.check(tau)?;
        let e = (-tau * tau).exp();
        // d/dtau [coeff c1 e / (2U)]
        let d_slope = 0.5 * self.coeff * self.c1 * (-2.0 * tau * e / u - e * self.c1 * e / (u * u));
        Ok(d_slope / (2.0 * u / self.coeff))
    }

    /// Value as `tau -> inf`.
    pub fn limit(&self) -> f64 {
        self.c1 * (0.5 * SQRT_PI + self.c2)
    }

    fn omega_bounds(&self) -> Result<(f64, f64)> {
        let lo = self.eval(self.tau_lo)?.0;
        let hi = if self.tau_hi.is_finite() {
            self.eval(self.tau_hi)?.0
        } else {
            f64::INFINITY
        };
        Ok((lo, hi))
    }

    fn invert(&self, omega: f64) -> Result<f64> {
        let (w_lo, w_hi) = self.omega_bounds()?;
        if !(omega >= w_lo && omega <= w_hi) {
            return Err(Error::Domain(format!(
                "w = {omega} outside the image [{w_lo}, {w_hi}] of the parametric map"
            )));
        }
        let lo = self.tau_lo;
        let mut hi = self.tau_hi;
        if !hi.is_finite() {
            let mut step = 1.0;
            hi = lo + step;
            while self.eval(hi)?.0 < omega {
                step *= 2.0;
                hi = lo + step;
                if step > 1e6 {
                    return Err(Error::Domain(format!("cannot bracket w = {omega}")));
                }
            }
        }
        let ftol = 1e-12 * omega.abs().max(1.0) * 0.5;
        let tau = safeguarded_newton(
            |tau| match self.eval(tau) {
                Ok((w, u)) => (w - omega, 2.0 * u / self.coeff),
                Err(_) => (f64::NAN, f64::NAN),
            },
            lo,
            hi,
            0.5 * (lo + hi),
            ftol,
            0.0,
        )?;
        Ok(tau)
    }
}

/// `(w, U)` at parameter `tau`.
pub fn eval_param_power(profile: &ParametricPowerProfile, tau: f64) -> Result<(f64, f64)> {
    profile.eval(tau)
}

fn power_coeff(kind: DiffusivityKind, what: &str) -> Result<f64> {
    match kind {
        DiffusivityKind::InverseSquare { coeff } => Ok(coeff),
        other => Err(Error::Domain(format!(
            "{what} needs D = a^2/U^2, got {}",
            other.name()
        ))),
    }
}

/// Liquid profile with `U(tau1) = U1`, `U(tau2) = U2`.
pub fn fit_power_liquid(p: &TransformedProblem, tau1: f64, tau2: f64) -> Result<ParametricPowerProfile> {
    let a = power_coeff(p.liquid_kind, "fit_power_liquid")?;
    if !(tau2 > tau1) {
        return Err(Error::Domain(format!("need tau2 > tau1, got {tau1}, {tau2}")));
    }
    let (u1, u2) = (p.u_evaporation, p.u_melting);
    if u1 == u2 {
        return Err(Error::SingularFit("U1 = U2 leaves C2 undefined".into()));
    }
    let delta = erf_diff(tau2, tau1);
    if delta == 0.0 {
        return Err(Error::SingularFit(format!("erf(tau2) = erf(tau1) for {tau1}, {tau2}")));
    }
    let c1 = 2.0 / SQRT_PI * (u2 - u1) / delta;
    let c2 = 0.5 * SQRT_PI * (u1 * erf(tau2) - u2 * erf(tau1)) / (u2 - u1);
    let mut profile = ParametricPowerProfile {
        c1,
        c2,
        coeff: a,
        tau_lo: tau1,
        tau_hi: tau2,
    };
    let margin = RANGE_MARGIN * (tau2 - tau1);
    if profile.raw_value(tau1 - margin) > 0.0 {
        profile.tau_lo = tau1 - margin;
    }
    if profile.raw_value(tau2 + margin) > 0.0 {
        profile.tau_hi = tau2 + margin;
    }
    Ok(profile)
}

/// Solid profile with `V(nu2) = V2` and `V(inf) = V0`.
pub fn fit_power_solid(p: &TransformedProblem, nu2: f64) -> Result<ParametricPowerProfile> {
    let b = power_coeff(p.solid_kind, "fit_power_solid")?;
    let (v2, v0) = (p.v_melting, p.v_far);
    if v2 == v0 {
        return Err(Error::SingularFit("V2 = V0 leaves C4 undefined".into()));
    }
    let tail = erfc(nu2);
    if tail < f64::EPSILON {
        return Err(Error::SingularFit(format!("erf(nu2) = 1 to machine precision (nu2={nu2})")));
    }
    let c3 = -2.0 / SQRT_PI * (v2 - v0) / tail;
    let c4 = 0.5 * SQRT_PI * (-1.0 - v0 * tail / (v2 - v0));
    let mut profile = ParametricPowerProfile {
        c1: c3,
        c2: c4,
        coeff: b,
        tau_lo: nu2,
        tau_hi: f64::INFINITY,
    };
    let lo = nu2 - RANGE_MARGIN * nu2.abs();
    if profile.raw_value(lo) > 0.0 {
        profile.tau_lo = lo;
    }
    Ok(profile)
}

// ---------------------------------------------------------------------------
// parametric exponential family (D = b^2 e^U)

/// Solves `y - nu e^{-y} = K` for `y = ln(2g - nu)` on the branch where the
/// left side is increasing.
fn solve_log_gap(c3: f64, b: f64, nu: f64, guess: Option<f64>) -> Result<f64> {
    let k = c3 + 0.25 * b * b * nu * nu;
    let psi = |y: f64| (y - nu * (-y).exp() - k, 1.0 + nu * (-y).exp());
    let lo = if nu >= 0.0 {
        k - 1.0
    } else {
        let edge = (-nu).ln();
        if psi(edge).0 >= 0.0 {
            return Err(Error::NoRoot {
                lo: 0.5 * nu + 0.5 * (-nu),
                hi: f64::INFINITY,
                context: format!("implicit relation has no root with g > 0 at nu = {nu}"),
            });
        }
        edge
    };
    let mut step = 1.0f64;
    let mut hi = lo.max(k) + step;
    while psi(hi).0 < 0.0 {
        step *= 2.0;
        hi = lo.max(k) + step;
        if step > 1e6 {
            return Err(Error::NoRoot {
                lo: 0.5 * nu,
                hi: 0.5 * nu + 0.5 * hi.exp(),
                context: "implicit relation for g".into(),
            });
        }
    }
    let x0 = guess.filter(|g| *g > lo && *g < hi).unwrap_or(0.5 * (lo + hi));
    let ftol = 1e-15 * (1.0 + k.abs());
    safeguarded_newton(psi, lo, hi, x0, ftol, 0.0)
}

/// Largest gap `2g - nu` representable; beyond it `g` overflows.
const G_MAX_LOG: f64 = 700.0;

/// Root `g` of `ln(2g - nu) - nu/(2g - nu) - (b^2/4) nu^2 = c3` with
/// `2g - nu > 0`.
pub fn solve_implicit_g(c3: f64, b: f64, nu: f64) -> Result<f64> {
    let y = solve_log_gap(c3, b, nu, None)?;
    if y > G_MAX_LOG {
        return Err(Error::NoRoot {
            lo: 0.5 * nu,
            hi: 0.5 * nu + 0.5 * G_MAX_LOG.exp(),
            context: format!("root of the implicit relation overflows (ln(2g - nu) = {y})"),
        });
    }
    Ok(0.5 * (nu + y.exp()))
}

/// Left side of the implicit relation minus `c3`.
pub fn implicit_relation(c3: f64, b: f64, nu: f64, g: f64) -> f64 {
    let h = 2.0 * g - nu;
    h.ln() - nu / h - 0.25 * b * b * nu * nu - c3
}

/// Evaluates `1/g(nu)` and related quantities, memoizing the inner root
/// solves for the duration of one evaluation pass.
struct GEvaluator {
    c3: f64,
    b: f64,
    cache: HashMap<u64, f64>,
    last: Option<f64>,
}

impl GEvaluator {
    fn new(c3: f64, b: f64) -> Self {
        GEvaluator {
            c3,
            b,
            cache: HashMap::new(),
            last: None,
        }
    }

    fn log_gap(&mut self, nu: f64) -> Result<f64> {
        if let Some(&y) = self.cache.get(&nu.to_bits()) {
            return Ok(y);
        }
        let y = solve_log_gap(self.c3, self.b, nu, self.last)?;
        self.cache.insert(nu.to_bits(), y);
        self.last = Some(y);
        Ok(y)
    }

    /// `1/g = 2 / (nu + h)`, safe for huge `h`.
    fn recip(&mut self, nu: f64) -> Result<f64> {
        let y = self.log_gap(nu)?;
        let inv_h = (-y).exp();
        Ok(2.0 * inv_h / (1.0 + nu * inv_h))
    }

    fn integral(&mut self, from: f64, to: f64) -> Result<f64> {
        let mut failure = None;
        let est = integrate(
            |s| match self.recip(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            from,
            to,
            G_QUAD_TOL,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(est?.value)
    }

    fn tail(&mut self, from: f64) -> Result<TailEstimate> {
        let width = (1.0 / self.b).min(1.0);
        let mut failure = None;
        let est = integrate_tail(
            |s| match self.recip(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            from,
            width,
            G_QUAD_TOL,
            TAIL_CUTOFF,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        est
    }
}

/// `V(nu) = v_anchor + int_{nu_anchor}^{nu} ds / g(s)`, `w = nu e^{-V/2}`,
/// with `g` from the implicit relation with constant `c3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParametricExpProfile {
    pub c3: f64,
    pub coeff: f64,
    pub nu_anchor: f64,
    pub v_anchor: f64,
    pub nu_lo: f64,
    pub nu_hi: f64,
}

/// Derivatives of an exp-family profile at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPoint {
    pub nu: f64,
    pub omega: f64,
    pub value: f64,
    pub g: f64,
    pub slope: f64,
    pub curvature: f64,
}

impl ParametricExpProfile {
    fn check(&self, nu: f64) -> Result<()> {
        if nu >= self.nu_lo && nu <= self.nu_hi {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "nu = {nu} outside working range [{}, {}]",
                self.nu_lo, self.nu_hi
            )))
        }
    }

    /// `(w, V)` at parameter `nu`.
    pub fn eval(&self, nu: f64) -> Result<(f64, f64)> {
        self.check(nu)?;
        let mut g = GEvaluator::new(self.c3, self.coeff);
        let v = self.v_anchor + g.integral(self.nu_anchor, nu)?;
        Ok((nu * (-0.5 * v).exp(), v))
    }

    /// Full local data at `nu`: value, `g`, and the `w`-derivatives from the
    /// chain rule, with `dg/dnu` from implicit differentiation.
    pub fn point(&self, nu: f64) -> Result<ExpPoint> {
        let (omega, v) = self.eval(nu)?;
        let g = solve_implicit_g(self.c3, self.coeff, nu)?;
        let h = 2.0 * g - nu;
        let b2 = self.coeff * self.coeff;
        // relation: ln h - nu/h - b^2 nu^2 / 4 = c3
        let dh = (1.0 / h + 0.5 * b2 * nu) / (1.0 / h + nu / (h * h));
        let e_half = (0.5 * v).exp();
        let slope = 2.0 * e_half / h;
        let d_slope = 2.0 * e_half * (0.5 / (g * h) - dh / (h * h));
        let d_omega = h / (2.0 * g) / e_half;
        Ok(ExpPoint {
            nu,
            omega,
            value: v,
            g,
            slope,
            curvature: d_slope / d_omega,
        })
    }

    /// `dw/dnu`.
    pub fn omega_rate(&self, nu: f64) -> Result<f64> {
        let (_, v) = self.eval(nu)?;
        let g = solve_implicit_g(self.c3, self.coeff, nu)?;
        Ok((-0.5 * v).exp() * (2.0 * g - nu) / (2.0 * g))
    }

    /// `V(inf)` with the tail truncation record.
    pub fn limit(&self) -> Result<TailEstimate> {
        let mut g = GEvaluator::new(self.c3, self.coeff);
        let mut t = g.tail(self.nu_anchor)?;
        t.value += self.v_anchor;
        Ok(t)
    }

    fn invert(&self, omega: f64) -> Result<f64> {
        let w_lo = self.eval(self.nu_lo)?.0;
        if omega < w_lo {
            return Err(Error::Domain(format!(
                "w = {omega} below the image [{w_lo}, inf) of the parametric map"
            )));
        }
        let lo = self.nu_lo;
        let mut step = 1.0f64.max(lo.abs());
        let mut hi = lo + step;
        while self.eval(hi.min(self.nu_hi))?.0 < omega {
            if hi >= self.nu_hi {
                return Err(Error::Domain(format!(
                    "w = {omega} above the image of [{lo}, {}]",
                    self.nu_hi
                )));
            }
            step *= 2.0;
            hi = lo + step;
        }
        let hi = hi.min(self.nu_hi);
        let ftol = 1e-12 * omega.abs().max(1.0) * 0.5;
        // each evaluation integrates from the anchor; fine for a handful of steps
        safeguarded_newton(
            |nu| match (self.eval(nu), solve_implicit_g(self.c3, self.coeff, nu)) {
                (Ok((w, v)), Ok(g)) => (w - omega, (-0.5 * v).exp() * (2.0 * g - nu) / (2.0 * g)),
                _ => (f64::NAN, f64::NAN),
            },
            lo,
            hi,
            0.5 * (lo + hi),
            ftol,
            0.0,
        )
    }
}

/// `(w, V)` at parameter `nu`.
pub fn eval_param_exp(profile: &ParametricExpProfile, nu: f64) -> Result<(f64, f64)> {
    profile.eval(nu)
}

/// Exp-family solid profile anchored at `(nu2, V2)` with constant `c3`.
pub fn exp_profile(p: &TransformedProblem, c3: f64, nu2: f64) -> Result<ParametricExpProfile> {
    let b = match p.solid_kind {
        DiffusivityKind::ExpDiff { coeff } => coeff,
        other => {
            return Err(Error::Domain(format!(
                "exp profile needs D = b^2 e^V, got {}",
                other.name()
            )))
        }
    };
    if !(nu2 > 0.0) {
        return Err(Error::Domain(format!("need nu2 > 0, got {nu2}")));
    }
    Ok(ParametricExpProfile {
        c3,
        coeff: b,
        nu_anchor: nu2,
        v_anchor: p.v_melting,
        nu_lo: nu2 * (1.0 - RANGE_MARGIN),
        nu_hi: f64::INFINITY,
    })
}

// ---------------------------------------------------------------------------
// unified profile view

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PhaseProfile {
    Erf(ErfProfile),
    Power(ParametricPowerProfile),
    Exp(ParametricExpProfile),
}

/// Inverts `w -> parameter` for a parametric profile.
pub fn invert_omega(profile: &PhaseProfile, omega: f64) -> Result<f64> {
    match profile {
        PhaseProfile::Power(p) => p.invert(omega),
        PhaseProfile::Exp(p) => p.invert(omega),
        PhaseProfile::Erf(_) => Err(Error::Domain("erf profiles are not parametric".into())),
    }
}

impl PhaseProfile {
    pub fn value_at_omega(&self, omega: f64) -> Result<f64> {
        match self {
            PhaseProfile::Erf(p) => Ok(p.value(omega)),
            PhaseProfile::Power(p) => p.eval(p.invert(omega)?).map(|(_, u)| u),
            PhaseProfile::Exp(p) => p.eval(p.invert(omega)?).map(|(_, v)| v),
        }
    }

    pub fn slope_at_omega(&self, omega: f64) -> Result<f64> {
        match self {
            PhaseProfile::Erf(p) => Ok(p.slope(omega)),
            PhaseProfile::Power(p) => p.slope(p.invert(omega)?),
            PhaseProfile::Exp(p) => Ok(p.point(p.invert(omega)?)?.slope),
        }
    }

    /// Value as `w -> inf` (solid profiles).
    pub fn far_value(&self) -> Result<f64> {
        match self {
            PhaseProfile::Erf(p) => Ok(p.limit()),
            PhaseProfile::Power(p) => Ok(p.limit()),
            PhaseProfile::Exp(p) => Ok(p.limit()?.value),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            PhaseProfile::Erf(_) => "erf",
            PhaseProfile::Power(_) => "parametric_power",
            PhaseProfile::Exp(_) => "parametric_exp",
        }
    }
}

/// `U'' + (w/2) D(U) U'` at `w`, with derivatives from closed forms (erf)
/// or the parametric chain rule. Parametric profiles are first inverted;
/// the residual is then taken at the recovered parameter.
pub fn ode_residual(profile: &PhaseProfile, omega: f64, kind: DiffusivityKind) -> Result<Residual> {
    match profile {
        PhaseProfile::Erf(p) => Ok(ode_residual_from_derivatives(
            omega,
            kind.eval(p.value(omega)),
            p.slope(omega),
            p.curvature(omega),
        )),
        PhaseProfile::Power(p) => power_residual_at(p, p.invert(omega)?, kind),
        PhaseProfile::Exp(p) => exp_residual_at(p, p.invert(omega)?, kind),
    }
}

/// ODE residual of a power-family profile at parameter `tau`.
pub fn power_residual_at(p: &ParametricPowerProfile, tau: f64, kind: DiffusivityKind) -> Result<Residual> {
    let (w, u) = p.eval(tau)?;
    Ok(ode_residual_from_derivatives(
        w,
        kind.eval(u),
        p.slope(tau)?,
        p.curvature(tau)?,
    ))
}

/// ODE residual of an exp-family profile at parameter `nu`.
pub fn exp_residual_at(p: &ParametricExpProfile, nu: f64, kind: DiffusivityKind) -> Result<Residual> {
    let pt = p.point(nu)?;
    Ok(ode_residual_from_derivatives(
        pt.omega,
        kind.eval(pt.value),
        pt.slope,
        pt.curvature,
    ))
}

// ---------------------------------------------------------------------------
// assembled solution

/// Self-similar solution: liquid profile on `[w1, w2]`, solid on `[w2, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilaritySolution {
    pub problem: TransformedProblem,
    pub liquid: PhaseProfile,
    pub solid: PhaseProfile,
    pub omega1: f64,
    pub omega2: f64,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub nu2: Option<f64>,
}

/// One reconstructed field sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub phase: Phase,
    pub omega: f64,
    /// `U` or `V`.
    pub transformed: f64,
}

impl SimilaritySolution {
    pub fn new(
        problem: TransformedProblem,
        liquid: PhaseProfile,
        solid: PhaseProfile,
        omega1: f64,
        omega2: f64,
    ) -> Result<Self> {
        if !(omega1 > 0.0 && omega2 > omega1) {
            return Err(Error::NonPhysicalRoot(format!(
                "front constants must satisfy 0 < w1 < w2, got {omega1}, {omega2}"
            )));
        }
        Ok(SimilaritySolution {
            problem,
            liquid,
            solid,
            omega1,
            omega2,
            tau1: None,
            tau2: None,
            nu2: None,
        })
    }

    pub fn front(&self, phase: Phase, t: f64) -> f64 {
        match phase {
            Phase::Liquid => self.omega1 * t.sqrt(),
            Phase::Solid => self.omega2 * t.sqrt(),
        }
    }

    pub fn profile(&self, phase: Phase) -> &PhaseProfile {
        match phase {
            Phase::Liquid => &self.liquid,
            Phase::Solid => &self.solid,
        }
    }

    /// `U` or `V` at similarity coordinate `w >= w1`; at `w2` the liquid
    /// side is reported.
    pub fn value_at(&self, omega: f64) -> Result<FieldPoint> {
        let omega = if omega < self.omega1 && self.omega1 - omega <= 8.0 * f64::EPSILON * self.omega1 {
            self.omega1
        } else {
            omega
        };
        if !(omega >= self.omega1) {
            return Err(Error::OutsideDomain(format!(
                "w = {omega} lies before the evaporation front w1 = {}",
                self.omega1
            )));
        }
        let phase = if omega <= self.omega2 {
            Phase::Liquid
        } else {
            Phase::Solid
        };
        let omega_eval = match (phase, self.profile(phase)) {
            // parametric inverses are only defined on their working range
            (Phase::Liquid, PhaseProfile::Power(_)) => omega.min(self.omega2),
            _ => omega,
        };
        Ok(FieldPoint {
            phase,
            omega,
            transformed: self.profile(phase).value_at_omega(omega_eval)?,
        })
    }

    /// Like [`value_at`](Self::value_at) but for a prescribed phase, with
    /// `w` clamped into that phase's interval. Used to compare numerical
    /// fields whose fronts differ slightly from the exact ones.
    pub fn value_in_phase(&self, phase: Phase, omega: f64) -> Result<f64> {
        let w = match phase {
            Phase::Liquid => omega.clamp(self.omega1, self.omega2),
            Phase::Solid => omega.max(self.omega2),
        };
        match self.profile(phase) {
            PhaseProfile::Erf(p) => Ok(p.value(omega)),
            other => other.value_at_omega(w),
        }
    }
}

/// Transformed value `U`/`V` at `(t, x)`.
pub fn reconstruct_transformed(sol: &SimilaritySolution, t: f64, x: f64) -> Result<FieldPoint> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    sol.value_at(x / t.sqrt())
}

/// Physical temperature at `(t, x)`: similarity value followed by the
/// inverse Kirchhoff transform of the phase found at `w = x / sqrt(t)`.
pub fn reconstruct_field(sol: &SimilaritySolution, m: &MaterialModel, t: f64, x: f64) -> Result<(Phase, f64)> {
    let pt = reconstruct_transformed(sol, t, x)?;
    Ok((pt.phase, m.temperature(pt.phase, pt.transformed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{build_transformed_problem, MaterialModel};

    fn unit_problem(u1: f64, u2: f64, v2: f64, v0: f64, coeff: f64) -> TransformedProblem {
        TransformedProblem {
            liquid_kind: DiffusivityKind::ConstDiff { coeff },
            solid_kind: DiffusivityKind::ConstDiff { coeff },
            u_evaporation: u1,
            u_melting: u2,
            v_melting: v2,
            v_far: v0,
            latent_evaporation: 1.0,
            latent_melting: 1.0,
            flux_amplitude: 1.0,
            ref_u: 0.0,
            ref_v: 0.0,
        }
    }

    #[test]
    fn erf_liquid_interpolates() {
        let p = unit_problem(1.0, 0.0, 1.0, 0.0, 2.0);
        let prof = fit_erf_liquid(&p, 0.5, 1.0).unwrap();
        assert!((prof.value(0.5) - 1.0).abs() < 1e-15);
        assert!(prof.value(1.0).abs() < 1e-15);
    }

    #[test]
    fn erf_liquid_degenerate_data() {
        let p = unit_problem(1.0, 1.0, 1.0, 0.0, 2.0);
        let prof = fit_erf_liquid(&p, 0.5, 1.0).unwrap();
        assert_eq!(prof.c1, 0.0);
        assert_eq!(prof.value(0.7), 1.0);
    }

    #[test]
    fn erf_liquid_rejects_degenerate_interval() {
        let p = unit_problem(1.0, 0.0, 1.0, 0.0, 2.0);
        assert!(fit_erf_liquid(&p, 0.5, 0.5).is_err());
        // both fronts deep in the tail: erf difference underflows
        assert!(matches!(
            fit_erf_liquid(&p, 40.0, 41.0),
            Err(Error::SingularFit(_))
        ));
    }

    #[test]
    fn erf_solid_constants() {
        let p = unit_problem(1.0, 0.0, 1.0, 0.0, 1.0);
        let prof = fit_erf_solid(&p, 1.0).unwrap();
        let e = erf(0.5);
        assert!((prof.c1 - 1.0 / SQRT_PI / (e - 1.0)).abs() < 1e-15);
        assert!((prof.c2 + 1.0 / (e - 1.0)).abs() < 1e-14);
        assert!((prof.value(1.0) - 1.0).abs() < 1e-14);
        assert!(prof.limit().abs() < 1e-14);
        let flat = fit_erf_solid(&unit_problem(1.0, 0.0, 0.5, 0.5, 1.0), 1.0).unwrap();
        assert_eq!(flat.c1, 0.0);
        assert!(matches!(fit_erf_solid(&p, 20.0), Err(Error::SingularFit(_))));
    }

    #[test]
    fn erf_eval_examples() {
        let prof = ErfProfile {
            c1: 2.0 / SQRT_PI,
            c2: 0.0,
            coeff: 2.0,
        };
        assert_eq!(eval_erf(&prof, 0.0), 0.0);
        assert!((eval_erf(&prof, 1e3) - 1.0).abs() < 1e-15);
        assert!((eval_erf(&prof, 0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
    }

    #[test]
    fn aluminium_boundary_fit() {
        let p = build_transformed_problem(&MaterialModel::aluminium()).unwrap();
        let liq = fit_erf_liquid(&p, 0.0127, 0.0202).unwrap();
        let sol = fit_erf_solid(&p, 0.0202).unwrap();
        assert!((liq.value(0.0127) / p.u_evaporation - 1.0).abs() < 1e-9);
        assert!((liq.value(0.0202) / p.u_melting - 1.0).abs() < 1e-9);
        assert!((sol.value(0.0202) / p.v_melting - 1.0).abs() < 1e-9);
        assert!((sol.limit() / p.v_far - 1.0).abs() < 1e-9);
    }

    #[test]
    fn power_eval_examples() {
        let prof = ParametricPowerProfile {
            c1: 1.0,
            c2: 1.0,
            coeff: 1.0,
            tau_lo: -1.0,
            tau_hi: 2.0,
        };
        assert_eq!(eval_param_power(&prof, 0.0).unwrap(), (1.0, 1.0));
        let (w, u) = eval_param_power(&prof, 1.0).unwrap();
        let u_exp = 1.0 + 0.5 * SQRT_PI * erf(1.0);
        assert!((u - u_exp).abs() < 1e-15);
        assert!((w - (2.0 * u_exp + (-1.0f64).exp())).abs() < 1e-15);
        // dw/dtau = 2U / coeff by central difference
        for &tau in &[-0.5, 0.3, 1.4] {
            let h = 1e-5;
            let fd = (prof.eval(tau + h).unwrap().0 - prof.eval(tau - h).unwrap().0) / (2.0 * h);
            assert!((fd - prof.omega_rate(tau).unwrap()).abs() < 1e-8);
        }
        assert!(prof.eval(3.0).is_err());
    }

    #[test]
    fn power_rejects_nonpositive_u() {
        let prof = ParametricPowerProfile {
            c1: 1.0,
            c2: -0.5,
            coeff: 1.0,
            tau_lo: -3.0,
            tau_hi: 3.0,
        };
        assert!(matches!(prof.eval(-2.0), Err(Error::MonotonicityDomain(_))));
    }

    #[test]
    fn power_inversion_round_trip() {
        let prof = ParametricPowerProfile {
            c1: 1.0,
            c2: 1.0,
            coeff: 1.0,
            tau_lo: -0.5,
            tau_hi: f64::INFINITY,
        };
        let pp = PhaseProfile::Power(prof);
        let w = prof.eval(0.7).unwrap().0;
        assert!((invert_omega(&pp, w).unwrap() - 0.7).abs() < 1e-10);
        let w_lo = prof.eval(-0.5).unwrap().0;
        assert!(matches!(invert_omega(&pp, w_lo - 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn implicit_g_closed_form_at_zero() {
        for &c3 in &[-2.0, 0.0, 1.5] {
            let g = solve_implicit_g(c3, 1.3, 0.0).unwrap();
            assert!((g - 0.5 * f64::exp(c3)).abs() < 1e-15 * g.max(1.0));
        }
    }

    #[test]
    fn implicit_g_residual_and_bisection_oracle() {
        let g = solve_implicit_g(0.0, 1.0, 1.0).unwrap();
        assert!(implicit_relation(0.0, 1.0, 1.0, g).abs() < 1e-12);
        // bisection over g in (0.5, 50)
        let (mut lo, mut hi) = (0.5 + 1e-12, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if implicit_relation(0.0, 1.0, 1.0, mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((g - 0.5 * (lo + hi)).abs() < 1e-12);
    }

    #[test]
    fn exp_profile_anchor() {
        let prof = ParametricExpProfile {
            c3: 0.2,
            coeff: 1.0,
            nu_anchor: 0.8,
            v_anchor: 0.3,
            nu_lo: 0.72,
            nu_hi: f64::INFINITY,
        };
        let (w, v) = eval_param_exp(&prof, 0.8).unwrap();
        assert_eq!(v, 0.3);
        assert!((w - 0.8 * (-0.15f64).exp()).abs() < 1e-16);
        let mut last = v;
        for k in 1..10 {
            let (_, vk) = prof.eval(0.8 + 0.3 * k as f64).unwrap();
            assert!(vk >= last);
            last = vk;
        }
        assert!(prof.limit().unwrap().value >= last);
    }
}
