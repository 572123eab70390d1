//! Material coefficient models and the Kirchhoff transforms.
//!
//! The physical problem is posed for temperatures `T_k(t, x)` with
//! temperature-dependent conductivity `lambda_k(T)` and volumetric heat
//! capacity `C_k(T)`. Two integral substitutions bring it to canonical form:
//!
//! ```text
//! u = int_0^T C(s) ds                  (kirchhoff_small)
//! U = offset + int_{u*}^u d(s) ds      (kirchhoff_big),  d(u) = lambda(T) / C(T)
//! ```
//!
//! after which the heat equation reads `D(U) U_t = U_xx` with
//! `D(U) = 1 / d(u)`. Only coefficient pairs whose induced `D` is one of
//! `a^2`, `a^2 / U^2` or `b^2 e^U` are accepted; the additive `offset` fixes
//! the gauge in which `D` takes exactly that form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::safeguarded_newton;

/// Relative tolerance used when matching exponents and rates.
const MATCH_TOL: f64 = 1e-12;

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= MATCH_TOL * 1f64.max(x.abs()).max(y.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Liquid,
    Solid,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Liquid => f.write_str("liquid"),
            Phase::Solid => f.write_str("solid"),
        }
    }
}

/// A temperature-dependent material coefficient (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficient", into = "RawCoefficient")]
pub enum CoefficientFn {
    Constant(f64),
    /// `scale * T^exponent`
    PowerLaw { scale: f64, exponent: f64 },
    /// `scale * exp(rate * T)`
    Exponential { scale: f64, rate: f64 },
}

/// Config-file shape of a coefficient: `{ kind = "power_law", params = [s, p] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCoefficient {
    pub kind: String,
    pub params: Vec<f64>,
}

impl TryFrom<RawCoefficient> for CoefficientFn {
    type Error = String;

    fn try_from(raw: RawCoefficient) -> std::result::Result<Self, String> {
        let want = |n: usize| {
            if raw.params.len() == n {
                Ok(())
            } else {
                Err(format!(
                    "kind `{}` expects {n} params, got {}",
                    raw.kind,
                    raw.params.len()
                ))
            }
        };
        match raw.kind.as_str() {
            "constant" => {
                want(1)?;
                Ok(CoefficientFn::Constant(raw.params[0]))
            }
            "power_law" => {
                want(2)?;
                Ok(CoefficientFn::PowerLaw {
                    scale: raw.params[0],
                    exponent: raw.params[1],
                })
            }
            "exponential" => {
                want(2)?;
                Ok(CoefficientFn::Exponential {
                    scale: raw.params[0],
                    rate: raw.params[1],
                })
            }
            other => Err(format!(
                "unknown coefficient kind `{other}` (expected constant, power_law or exponential)"
            )),
        }
    }
}

impl From<CoefficientFn> for RawCoefficient {
    fn from(c: CoefficientFn) -> Self {
        let (kind, params) = match c {
            CoefficientFn::Constant(v) => ("constant", vec![v]),
            CoefficientFn::PowerLaw { scale, exponent } => ("power_law", vec![scale, exponent]),
            CoefficientFn::Exponential { scale, rate } => ("exponential", vec![scale, rate]),
        };
        RawCoefficient {
            kind: kind.to_string(),
            params,
        }
    }
}

/// Canonical view: either `s * T^p` or `s * exp(r T)`.
#[derive(Debug, Clone, Copy)]
enum Shape {
    Power { scale: f64, exponent: f64 },
    Exp { scale: f64, rate: f64 },
}

impl CoefficientFn {
    fn shape(&self) -> Shape {
        match *self {
            CoefficientFn::Constant(v) => Shape::Power {
                scale: v,
                exponent: 0.0,
            },
            CoefficientFn::PowerLaw { scale, exponent } => Shape::Power { scale, exponent },
            CoefficientFn::Exponential { scale, rate } if rate == 0.0 => Shape::Power {
                scale,
                exponent: 0.0,
            },
            CoefficientFn::Exponential { scale, rate } => Shape::Exp { scale, rate },
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            CoefficientFn::Constant(v) => v,
            CoefficientFn::PowerLaw { scale, exponent } => scale * t.powf(exponent),
            CoefficientFn::Exponential { scale, rate } => scale * (rate * t).exp(),
        }
    }

    /// Checks positivity and finiteness. A heat capacity must also be
    /// integrable at `T = 0`.
    pub fn validate(&self, field: &str, integrable_at_zero: bool) -> Result<()> {
        let (scale, shape) = match *self {
            CoefficientFn::Constant(v) => (v, 0.0),
            CoefficientFn::PowerLaw { scale, exponent } => (scale, exponent),
            CoefficientFn::Exponential { scale, rate } => (scale, rate),
        };
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param(field, format!("scale must be positive and finite, got {scale}")));
        }
        if !shape.is_finite() {
            return Err(Error::param(field, format!("exponent/rate must be finite, got {shape}")));
        }
        if integrable_at_zero {
            if let CoefficientFn::PowerLaw { exponent, .. } = *self {
                if exponent <= -1.0 {
                    return Err(Error::param(
                        field,
                        format!("power-law exponent {exponent} <= -1 makes int_0^T C diverge"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// `u = int_0^T C(s) ds`, in closed form for every coefficient kind.
pub fn kirchhoff_small(heat_capacity: &CoefficientFn, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("temperature must be finite and >= 0, got {t}")));
    }
    match heat_capacity.shape() {
        Shape::Power { scale, exponent } => {
            if exponent <= -1.0 {
                return Err(Error::Domain(format!(
                    "int_0^T s^{exponent} ds diverges at 0"
                )));
            }
            Ok(scale * t.powf(exponent + 1.0) / (exponent + 1.0))
        }
        Shape::Exp { scale, rate } => Ok(scale * (rate * t).exp_m1() / rate),
    }
}

fn inverse_kirchhoff_small(heat_capacity: &CoefficientFn, u: f64) -> f64 {
    match heat_capacity.shape() {
        Shape::Power { scale, exponent } => {
            ((exponent + 1.0) * u / scale).powf(1.0 / (exponent + 1.0))
        }
        Shape::Exp { scale, rate } => (rate * u / scale).ln_1p() / rate,
    }
}

/// Diffusivity `d(u)` of the first-stage variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Diffusivity {
    Constant(f64),
    /// `scale * u^exponent`
    PowerLaw { scale: f64, exponent: f64 },
    /// `scale * (1 + shift * u)^exponent`
    ShiftedPowerLaw { scale: f64, shift: f64, exponent: f64 },
    /// `scale * exp(rate * u)`
    Exponential { scale: f64, rate: f64 },
}

impl Diffusivity {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Diffusivity::Constant(k) => k,
            Diffusivity::PowerLaw { scale, exponent } => scale * u.powf(exponent),
            Diffusivity::ShiftedPowerLaw {
                scale,
                shift,
                exponent,
            } => scale * (1.0 + shift * u).powf(exponent),
            Diffusivity::Exponential { scale, rate } => scale * (rate * u).exp(),
        }
    }

    /// Whether `d` is positive and finite on all of `[lo, hi]`.
    fn defined_on(&self, lo: f64, hi: f64) -> bool {
        match *self {
            Diffusivity::Constant(k) => k > 0.0,
            Diffusivity::PowerLaw { exponent, .. } => {
                lo > 0.0 || (lo == 0.0 && exponent >= 0.0) || (lo == 0.0 && hi == 0.0)
            }
            Diffusivity::ShiftedPowerLaw { shift, .. } => {
                1.0 + shift * lo > 0.0 && 1.0 + shift * hi > 0.0
            }
            Diffusivity::Exponential { .. } => true,
        }
    }

    /// Natural primitive `F` with `F' = d`.
    fn primitive(&self, u: f64) -> f64 {
        match *self {
            Diffusivity::Constant(k) => k * u,
            Diffusivity::PowerLaw { scale, exponent } => {
                if exponent == -1.0 {
                    scale * u.ln()
                } else {
                    scale * u.powf(exponent + 1.0) / (exponent + 1.0)
                }
            }
            Diffusivity::ShiftedPowerLaw {
                scale,
                shift,
                exponent,
            } => {
                if exponent == -1.0 {
                    scale / shift * (shift * u).ln_1p()
                } else {
                    scale * (1.0 + shift * u).powf(exponent + 1.0) / (shift * (exponent + 1.0))
                }
            }
            Diffusivity::Exponential { scale, rate } => {
                if rate == 0.0 {
                    scale * u
                } else {
                    scale * (rate * u).exp() / rate
                }
            }
        }
    }

    fn inverse_primitive(&self, f: f64) -> f64 {
        match *self {
            Diffusivity::Constant(k) => f / k,
            Diffusivity::PowerLaw { scale, exponent } => {
                if exponent == -1.0 {
                    (f / scale).exp()
                } else {
                    (f * (exponent + 1.0) / scale).powf(1.0 / (exponent + 1.0))
                }
            }
            Diffusivity::ShiftedPowerLaw {
                scale,
                shift,
                exponent,
            } => {
                if exponent == -1.0 {
                    (f * shift / scale).exp_m1() / shift
                } else {
                    let base = (f * shift * (exponent + 1.0) / scale).powf(1.0 / (exponent + 1.0));
                    (base - 1.0) / shift
                }
            }
            Diffusivity::Exponential { scale, rate } => {
                if rate == 0.0 {
                    f / scale
                } else {
                    (f * rate / scale).ln() / rate
                }
            }
        }
    }
}

/// `U = int_{u_ref}^u d(s) ds` in closed form.
pub fn kirchhoff_big(d: &Diffusivity, u: f64, u_ref: f64) -> Result<f64> {
    if !u.is_finite() || !u_ref.is_finite() {
        return Err(Error::Domain(format!("non-finite argument (u={u}, u*={u_ref})")));
    }
    if u < u_ref {
        return Err(Error::Domain(format!("u = {u} lies below the reference point u* = {u_ref}")));
    }
    if u == u_ref {
        return Ok(0.0);
    }
    if !d.defined_on(u_ref, u) {
        return Err(Error::Domain(format!(
            "diffusivity {d:?} is not positive on [{u_ref}, {u}]"
        )));
    }
    match *d {
        Diffusivity::Constant(k) => Ok(k * (u - u_ref)),
        _ => Ok(d.primitive(u) - d.primitive(u_ref)),
    }
}

/// Reduced diffusivity `D(U)` of the canonical ODE `U'' + (w/2) D(U) U' = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffusivityKind {
    /// `D(U) = coeff^2`
    ConstDiff { coeff: f64 },
    /// `D(U) = coeff^2 / U^2`
    InverseSquare { coeff: f64 },
    /// `D(U) = coeff^2 * exp(U)`
    ExpDiff { coeff: f64 },
}

impl DiffusivityKind {
    pub fn coeff(&self) -> f64 {
        match *self {
            DiffusivityKind::ConstDiff { coeff }
            | DiffusivityKind::InverseSquare { coeff }
            | DiffusivityKind::ExpDiff { coeff } => coeff,
        }
    }

    /// `D(w)`.
    pub fn eval(&self, w: f64) -> f64 {
        match *self {
            DiffusivityKind::ConstDiff { coeff } => coeff * coeff,
            DiffusivityKind::InverseSquare { coeff } => coeff * coeff / (w * w),
            DiffusivityKind::ExpDiff { coeff } => coeff * coeff * w.exp(),
        }
    }

    /// A primitive of `D`, i.e. the first-stage variable `u` up to a constant.
    /// Used by the oracle's energy audit.
    pub fn energy(&self, w: f64) -> f64 {
        match *self {
            DiffusivityKind::ConstDiff { coeff } => coeff * coeff * w,
            DiffusivityKind::InverseSquare { coeff } => -coeff * coeff / w,
            DiffusivityKind::ExpDiff { coeff } => coeff * coeff * w.exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiffusivityKind::ConstDiff { .. } => "const",
            DiffusivityKind::InverseSquare { .. } => "inverse_square",
            DiffusivityKind::ExpDiff { .. } => "exp",
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        let c = self.coeff();
        if c.is_finite() && c > 0.0 {
            Ok(())
        } else {
            Err(Error::param(field, format!("coefficient must be positive, got {c}")))
        }
    }
}

/// The full map `T -> U` for one phase, with its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KirchhoffMap {
    pub conductivity: CoefficientFn,
    pub heat_capacity: CoefficientFn,
    pub diffusivity: Diffusivity,
    /// Lower limit `u*` of the second-stage integral.
    pub u_ref: f64,
    /// Gauge constant added after the second stage.
    pub offset: f64,
    pub kind: DiffusivityKind,
}

impl KirchhoffMap {
    pub fn forward(&self, t: f64) -> Result<f64> {
        let u = kirchhoff_small(&self.heat_capacity, t)?;
        Ok(self.offset + kirchhoff_big(&self.diffusivity, u, self.u_ref)?)
    }

    /// `dU/dT`, which is simply the conductivity.
    pub fn slope(&self, t: f64) -> f64 {
        self.conductivity.eval(t)
    }

    /// Inverts [`forward`](Self::forward). Closed form first, then a
    /// Newton polish on the monotone forward map; falls back to bracketed
    /// root finding if the closed form is unusable.
    pub fn inverse(&self, w: f64) -> Result<f64> {
        if !w.is_finite() {
            return Err(Error::Domain(format!("non-finite transformed value {w}")));
        }
        let lowest = self.forward_lower_limit();
        if w < lowest {
            return Err(Error::Domain(format!(
                "value {w} is below the range of the Kirchhoff map (lower limit {lowest})"
            )));
        }
        let f_target = w - self.offset + self.diffusivity.primitive(self.u_ref);
        let u = match self.diffusivity {
            Diffusivity::Constant(k) => self.u_ref + (w - self.offset) / k,
            d => d.inverse_primitive(f_target),
        };
        let mut t = if u.is_finite() && u >= 0.0 {
            inverse_kirchhoff_small(&self.heat_capacity, u)
        } else {
            f64::NAN
        };
        if t.is_finite() && t >= 0.0 {
            for _ in 0..2 {
                let Ok(fw) = self.forward(t) else { break };
                let slope = self.slope(t);
                let next = t - (fw - w) / slope;
                if !(next.is_finite() && next >= 0.0) {
                    break;
                }
                t = next;
            }
            return Ok(t);
        }
        self.inverse_by_bracketing(w)
    }

    fn forward_lower_limit(&self) -> f64 {
        match self.forward(0.0) {
            Ok(v) => v,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn inverse_by_bracketing(&self, w: f64) -> Result<f64> {
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let eval = |t: f64| self.forward(t).map(|v| v - w);
        while eval(hi).map(|v| v < 0.0).unwrap_or(true) {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::Domain(format!("value {w} exceeds the Kirchhoff map range")));
            }
        }
        if eval(lo).is_err() {
            lo = f64::MIN_POSITIVE;
        }
        safeguarded_newton(
            |t| match self.forward(t) {
                Ok(v) => (v - w, self.slope(t)),
                Err(_) => (-1.0, f64::NAN),
            },
            lo,
            hi,
            0.5 * (lo + hi),
            0.0,
            0.0,
        )
    }
}

/// Coefficients of one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseCoefficients {
    #[serde(rename = "lambda")]
    pub conductivity: CoefficientFn,
    #[serde(rename = "C")]
    pub heat_capacity: CoefficientFn,
}

/// Physical model: per-phase coefficients, latent heats, temperatures and
/// the flux amplitude `q0` of `q(t) = q0 / sqrt(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialModel {
    pub liquid: PhaseCoefficients,
    pub solid: PhaseCoefficients,
    /// Volumetric latent heat of evaporation (J/m^3).
    #[serde(rename = "Hv")]
    pub latent_evaporation: f64,
    /// Volumetric latent heat of melting (J/m^3).
    #[serde(rename = "Hm")]
    pub latent_melting: f64,
    #[serde(rename = "Tv")]
    pub t_evaporation: f64,
    #[serde(rename = "Tm")]
    pub t_melting: f64,
    /// Far-field (initial solid) temperature.
    #[serde(rename = "T0")]
    pub t_initial: f64,
    /// Flux amplitude (W s^1/2 / m^2).
    #[serde(rename = "q0")]
    pub flux_amplitude: f64,
}

impl MaterialModel {
    /// Parameters typical for aluminium.
    pub fn aluminium() -> Self {
        MaterialModel {
            liquid: PhaseCoefficients {
                conductivity: CoefficientFn::Constant(240.0),
                heat_capacity: CoefficientFn::Constant(2.7e6),
            },
            solid: PhaseCoefficients {
                conductivity: CoefficientFn::Constant(240.0),
                heat_capacity: CoefficientFn::Constant(2.74e6),
            },
            latent_evaporation: 2.69e10,
            latent_melting: 0.17e10,
            t_evaporation: 2793.0,
            t_melting: 933.0,
            t_initial: 300.0,
            flux_amplitude: 2.5e8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.liquid.conductivity.validate("liquid.lambda", false)?;
        self.liquid.heat_capacity.validate("liquid.C", true)?;
        self.solid.conductivity.validate("solid.lambda", false)?;
        self.solid.heat_capacity.validate("solid.C", true)?;
        for (name, v) in [
            ("Hv", self.latent_evaporation),
            ("Hm", self.latent_melting),
            ("q0", self.flux_amplitude),
            ("T0", self.t_initial),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.t_melting.is_finite() && self.t_melting > self.t_initial) {
            return Err(Error::param("Tm", "must exceed T0"));
        }
        if !(self.t_evaporation.is_finite() && self.t_evaporation > self.t_melting) {
            return Err(Error::param("Tv", "must exceed Tm"));
        }
        Ok(())
    }

    pub fn coefficients(&self, phase: Phase) -> &PhaseCoefficients {
        match phase {
            Phase::Liquid => &self.liquid,
            Phase::Solid => &self.solid,
        }
    }

    /// Classifies the phase and builds its Kirchhoff map.
    pub fn kirchhoff_map(&self, phase: Phase) -> Result<KirchhoffMap> {
        let c = self.coefficients(phase);
        classify(phase, c.conductivity, c.heat_capacity, self.t_initial)
    }

    /// `T -> U` (liquid) or `T -> V` (solid).
    pub fn transform(&self, phase: Phase, t: f64) -> Result<f64> {
        self.kirchhoff_map(phase)?.forward(t)
    }

    /// Inverse Kirchhoff transform back to physical temperature.
    pub fn temperature(&self, phase: Phase, w: f64) -> Result<f64> {
        self.kirchhoff_map(phase)?.inverse(w)
    }
}

fn unsupported(phase: Phase, lambda: CoefficientFn, c: CoefficientFn, why: &str) -> Error {
    Error::UnsupportedDiffusivity(format!(
        "{phase} phase: D(U) = C(T)/lambda(T) with lambda = {lambda:?}, C = {c:?} {why}; \
         supported forms are a^2, a^2/U^2 and b^2*exp(U)"
    ))
}

fn classify(
    phase: Phase,
    lambda: CoefficientFn,
    c: CoefficientFn,
    t_initial: f64,
) -> Result<KirchhoffMap> {
    let build = |diffusivity, u_ref, offset, kind| KirchhoffMap {
        conductivity: lambda,
        heat_capacity: c,
        diffusivity,
        u_ref,
        offset,
        kind,
    };
    match (lambda.shape(), c.shape()) {
        (
            Shape::Power {
                scale: l,
                exponent: p,
            },
            Shape::Power {
                scale: cs,
                exponent: m,
            },
        ) => {
            if close(p, m) {
                // d = l/c, D = c/l
                Ok(build(
                    Diffusivity::Constant(l / cs),
                    0.0,
                    0.0,
                    DiffusivityKind::ConstDiff {
                        coeff: (cs / l).sqrt(),
                    },
                ))
            } else if p < -1.0 && close(m, -p - 2.0) {
                // d(u) = k / u^2, canonical U = -k / u (negative)
                let k = l * cs / ((m + 1.0) * (m + 1.0));
                let u_ref = kirchhoff_small(&c, t_initial)?;
                Ok(build(
                    Diffusivity::PowerLaw {
                        scale: k,
                        exponent: -2.0,
                    },
                    u_ref,
                    -k / u_ref,
                    DiffusivityKind::InverseSquare { coeff: k.sqrt() },
                ))
            } else {
                Err(unsupported(phase, lambda, c, "is a non-constant power of U"))
            }
        }
        (Shape::Exp { scale: l, rate: r }, Shape::Exp { scale: cs, rate: s }) => {
            if close(r, s) {
                Ok(build(
                    Diffusivity::Constant(l / cs),
                    0.0,
                    0.0,
                    DiffusivityKind::ConstDiff {
                        coeff: (cs / l).sqrt(),
                    },
                ))
            } else if r > 0.0 && close(s, -r) {
                // d(u) = (l/c)(1 - r u / c)^-2, canonical U = (l/r) e^{rT}
                Ok(build(
                    Diffusivity::ShiftedPowerLaw {
                        scale: l / cs,
                        shift: s / cs,
                        exponent: -2.0,
                    },
                    0.0,
                    l / r,
                    DiffusivityKind::InverseSquare {
                        coeff: (cs * l / (r * r)).sqrt(),
                    },
                ))
            } else {
                Err(unsupported(phase, lambda, c, "is a power of (1 + beta U)"))
            }
        }
        (
            Shape::Power {
                scale: l,
                exponent: p,
            },
            Shape::Exp { scale: cs, rate: s },
        ) if p == 0.0 => {
            // U = l T, D = (c/l) exp(s U / l)
            if close(s, l) {
                Ok(build(
                    Diffusivity::ShiftedPowerLaw {
                        scale: l / cs,
                        shift: s / cs,
                        exponent: -1.0,
                    },
                    0.0,
                    0.0,
                    DiffusivityKind::ExpDiff {
                        coeff: (cs / l).sqrt(),
                    },
                ))
            } else {
                Err(unsupported(
                    phase,
                    lambda,
                    c,
                    "is exp(s U / lambda) with s != lambda",
                ))
            }
        }
        _ => Err(unsupported(phase, lambda, c, "has no closed reduced form")),
    }
}

/// The reduced boundary value problem in canonical variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformedProblem {
    pub liquid_kind: DiffusivityKind,
    pub solid_kind: DiffusivityKind,
    /// `U1`: liquid value at the evaporation front.
    pub u_evaporation: f64,
    /// `U2`: liquid value at the melting front.
    pub u_melting: f64,
    /// `V2`: solid value at the melting front.
    pub v_melting: f64,
    /// `V0`: solid value at infinity.
    pub v_far: f64,
    #[serde(rename = "Hv")]
    pub latent_evaporation: f64,
    #[serde(rename = "Hm")]
    pub latent_melting: f64,
    #[serde(rename = "q0")]
    pub flux_amplitude: f64,
    #[serde(default)]
    pub ref_u: f64,
    #[serde(default)]
    pub ref_v: f64,
}

impl TransformedProblem {
    pub fn kind(&self, phase: Phase) -> DiffusivityKind {
        match phase {
            Phase::Liquid => self.liquid_kind,
            Phase::Solid => self.solid_kind,
        }
    }

    /// Checks finiteness and positivity. The melting-problem orderings
    /// `U1 > U2`, `V2 > V0` are not enforced here since synthetic problems
    /// may legitimately violate them.
    pub fn validate(&self) -> Result<()> {
        self.liquid_kind.validate("liquid.coeff")?;
        self.solid_kind.validate("solid.coeff")?;
        for (name, v) in [
            ("U1", self.u_evaporation),
            ("U2", self.u_melting),
            ("V2", self.v_melting),
            ("V0", self.v_far),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        for (name, v) in [("Hv", self.latent_evaporation), ("Hm", self.latent_melting)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.flux_amplitude.is_finite() && self.flux_amplitude >= 0.0) {
            return Err(Error::param("q0", "must be non-negative"));
        }
        Ok(())
    }
}

/// Runs the two-stage transform on a validated material model.
pub fn build_transformed_problem(m: &MaterialModel) -> Result<TransformedProblem> {
    m.validate()?;
    let liquid = m.kirchhoff_map(Phase::Liquid)?;
    let solid = m.kirchhoff_map(Phase::Solid)?;
    Ok(TransformedProblem {
        liquid_kind: liquid.kind,
        solid_kind: solid.kind,
        u_evaporation: liquid.forward(m.t_evaporation)?,
        u_melting: liquid.forward(m.t_melting)?,
        v_melting: solid.forward(m.t_melting)?,
        v_far: solid.forward(m.t_initial)?,
        latent_evaporation: m.latent_evaporation,
        latent_melting: m.latent_melting,
        flux_amplitude: m.flux_amplitude,
        ref_u: liquid.u_ref,
        ref_v: solid.u_ref,
    })
}
