//! Transcendental systems for the front constants and their solution.
//!
//! Each system is written as a list of residuals, every residual a plain sum
//! of terms. The solver works on residuals divided by their largest term
//! (the raw equations mix magnitudes spanning many decades), and the final
//! root is re-checked with compensated summation of the same terms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, condition_estimate, solve_dense};
use crate::material::{DiffusivityKind, Phase, TransformedProblem};
use crate::quad::{integrate_tail, Tolerance};
use crate::similarity::{
    exp_profile, fit_erf_liquid, fit_erf_solid, fit_power_liquid, fit_power_solid, solve_implicit_g,
    ParametricExpProfile, PhaseProfile, SimilaritySolution,
};
use crate::special::{erf_diff, erfc, SQRT_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontCase {
    /// `D1 = a^2`, `D2 = b^2`; unknowns `(w1, w2)`.
    Ex1ConstConst,
    /// `D1 = a^2/U^2`, `D2 = b^2/V^2`; unknowns `(tau1, tau2, nu2)`.
    #[serde(rename = "ex2_invsq_invsq")]
    Ex2InvSqInvSq,
    /// `D1 = a^2`, `D2 = b^2 e^V`; unknowns `(w1, nu2)`.
    Ex3ConstExp,
}

impl FrontCase {
    pub fn unknowns(&self) -> &'static [&'static str] {
        match self {
            FrontCase::Ex1ConstConst => &["omega1", "omega2"],
            FrontCase::Ex2InvSqInvSq => &["tau1", "tau2", "nu2"],
            FrontCase::Ex3ConstExp => &["omega1", "nu2"],
        }
    }

    pub fn dim(&self) -> usize {
        self.unknowns().len()
    }

    pub fn tag(&self) -> &'static str {
        match self {
            FrontCase::Ex1ConstConst => "ex1_const_const",
            FrontCase::Ex2InvSqInvSq => "ex2_invsq_invsq",
            FrontCase::Ex3ConstExp => "ex3_const_exp",
        }
    }
}

impl std::fmt::Display for FrontCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Tighter than the profile quadrature: the far-field residual is iterated
/// on and must resolve well below the Newton tolerance.
const TAIL_TOL: Tolerance = Tolerance {
    abs: 1e-15,
    rel: 1e-13,
};

/// Residuals of one system at one point, as sums of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTerms {
    pub terms: Vec<Vec<f64>>,
}

impl ResidualTerms {
    pub fn raw(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.iter().sum()).collect()
    }

    pub fn scales(&self) -> Vec<f64> {
        self.terms
            .iter()
            .map(|t| t.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    pub fn scaled(&self) -> Vec<f64> {
        scale_all(&self.raw(), &self.scales())
    }

    /// Scaled residuals from compensated sums.
    pub fn certified(&self) -> Vec<f64> {
        let raw: Vec<f64> = self.terms.iter().map(|t| compensated_sum(t)).collect();
        scale_all(&raw, &self.scales())
    }
}

fn scale_all(raw: &[f64], scales: &[f64]) -> Vec<f64> {
    raw.iter()
        .zip(scales)
        .map(|(r, s)| if *s == 0.0 { *r } else { r / s })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontSystem {
    pub case: FrontCase,
    pub problem: TransformedProblem,
}

impl FrontSystem {
    /// Detects the case from the diffusivity kinds of `problem`.
    pub fn new(problem: TransformedProblem) -> Result<Self> {
        use DiffusivityKind::*;
        let case = match (problem.liquid_kind, problem.solid_kind) {
            (ConstDiff { .. }, ConstDiff { .. }) => FrontCase::Ex1ConstConst,
            (InverseSquare { .. }, InverseSquare { .. }) => FrontCase::Ex2InvSqInvSq,
            (ConstDiff { .. }, ExpDiff { .. }) => FrontCase::Ex3ConstExp,
            (l, s) => {
                return Err(Error::UnsupportedDiffusivity(format!(
                    "no solvable front system for liquid D1(U) = {}, solid D2(V) = {}",
                    l.name(),
                    s.name()
                )))
            }
        };
        Self::with_case(case, problem)
    }

    /// Uses an explicit case tag, which must agree with the problem's kinds.
    pub fn with_case(case: FrontCase, problem: TransformedProblem) -> Result<Self> {
        use DiffusivityKind::*;
        problem.validate()?;
        let ok = matches!(
            (case, problem.liquid_kind, problem.solid_kind),
            (FrontCase::Ex1ConstConst, ConstDiff { .. }, ConstDiff { .. })
                | (FrontCase::Ex2InvSqInvSq, InverseSquare { .. }, InverseSquare { .. })
                | (FrontCase::Ex3ConstExp, ConstDiff { .. }, ExpDiff { .. })
        );
        if !ok {
            return Err(Error::UnsupportedDiffusivity(format!(
                "case {case} does not match D1(U) = {}, D2(V) = {}",
                problem.liquid_kind.name(),
                problem.solid_kind.name()
            )));
        }
        if case == FrontCase::Ex2InvSqInvSq {
            let p = &problem;
            if !(p.u_evaporation > 0.0 && p.u_melting > 0.0 && p.v_melting > 0.0 && p.v_far > 0.0) {
                return Err(Error::MonotonicityDomain(format!(
                    "inverse-square profiles need U1, U2, V2, V0 > 0 (got {}, {}, {}, {})",
                    p.u_evaporation, p.u_melting, p.v_melting, p.v_far
                )));
            }
        }
        Ok(FrontSystem { case, problem })
    }

    /// Residual terms at `x` (unknowns as in [`FrontCase::unknowns`]).
    pub fn terms(&self, x: &[f64]) -> Result<ResidualTerms> {
        if x.len() != self.case.dim() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("bad unknown vector {x:?}")));
        }
        match self.case {
            FrontCase::Ex1ConstConst => residual_ex1_terms(&self.problem, x[0], x[1]),
            FrontCase::Ex2InvSqInvSq => residual_ex2_terms(&self.problem, x[0], x[1], x[2]),
            FrontCase::Ex3ConstExp => residual_ex3_terms(&self.problem, x[0], x[1]),
        }
    }

    pub fn scaled_residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.terms(x)?.scaled())
    }

    /// `(w1, w2)` implied by the unknowns.
    pub fn fronts(&self, x: &[f64]) -> Result<(f64, f64)> {
        match self.case {
            FrontCase::Ex1ConstConst => Ok((x[0], x[1])),
            FrontCase::Ex2InvSqInvSq => ex2_fronts(&self.problem, x[0], x[1]),
            FrontCase::Ex3ConstExp => Ok((x[0], x[1] * (-0.5 * self.problem.v_melting).exp())),
        }
    }
}

// ---------------------------------------------------------------------------
// Example 1

fn liquid_erf_flux_coeff(p: &TransformedProblem, omega1: f64, omega2: f64) -> Result<f64> {
    let a = p.liquid_kind.coeff();
    let delta = erf_diff(0.5 * a * omega2, 0.5 * a * omega1);
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::SingularSystem(format!(
            "erf(a w2/2) - erf(a w1/2) vanishes at w1={omega1}, w2={omega2}"
        )));
    }
    Ok(a / SQRT_PI * (p.u_melting - p.u_evaporation) / delta)
}

fn check_ordered(omega1: f64, omega2: f64) -> Result<()> {
    if omega1 > 0.0 && omega2 > omega1 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "need 0 < w1 < w2, got w1={omega1}, w2={omega2}"
        )))
    }
}

/// Evaporation-front flux balance for an erf liquid profile.
fn evaporation_terms(p: &TransformedProblem, c1: f64, omega1: f64) -> Vec<f64> {
    let a = p.liquid_kind.coeff();
    let flux = c1 * (-0.25 * a * a * omega1 * omega1).exp();
    vec![flux, -0.5 * omega1 * p.latent_evaporation, p.flux_amplitude]
}

fn residual_ex1_terms(p: &TransformedProblem, omega1: f64, omega2: f64) -> Result<ResidualTerms> {
    check_ordered(omega1, omega2)?;
    let (a, b) = (p.liquid_kind.coeff(), p.solid_kind.coeff());
    let c1 = liquid_erf_flux_coeff(p, omega1, omega2)?;
    let tail = erfc(0.5 * b * omega2);
    if tail < f64::EPSILON {
        return Err(Error::SingularSystem(format!(
            "erf(b w2/2) = 1 to machine precision at w2={omega2}"
        )));
    }
    let c3 = -b / SQRT_PI * (p.v_melting - p.v_far) / tail;
    let solid_flux = c3 * (-0.25 * b * b * omega2 * omega2).exp();
    let liquid_flux = c1 * (-0.25 * a * a * omega2 * omega2).exp();
    Ok(ResidualTerms {
        terms: vec![
            evaporation_terms(p, c1, omega1),
            vec![liquid_flux, 0.5 * omega2 * p.latent_melting, -solid_flux],
        ],
    })
}

/// Raw and scaled residuals of the Example 1 system.
///
/// `r1 = C1 e^{-a^2 w1^2/4} - (w1 Hv/2 - q0)`,
/// `r2 = C1 e^{-a^2 w2^2/4} + w2 Hm/2 - C3 e^{-b^2 w2^2/4}`.
pub fn residual_ex1(p: &TransformedProblem, omega1: f64, omega2: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = residual_ex1_terms(p, omega1, omega2)?;
    Ok((t.raw(), t.scaled()))
}

// ---------------------------------------------------------------------------
// Example 2

struct Ex2Parts {
    k1: f64,
    k2: f64,
}

fn ex2_parts(p: &TransformedProblem, tau1: f64, tau2: f64, nu2: f64) -> Result<Ex2Parts> {
    if !(tau2 > tau1) {
        return Err(Error::Domain(format!("need tau2 > tau1, got {tau1}, {tau2}")));
    }
    let delta = erf_diff(tau2, tau1);
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::SingularSystem(format!(
            "erf(tau2) - erf(tau1) vanishes at {tau1}, {tau2}"
        )));
    }
    let tail = erfc(nu2);
    if tail < f64::EPSILON {
        return Err(Error::SingularSystem(format!("erf(nu2) = 1 at nu2={nu2}")));
    }
    Ok(Ex2Parts {
        k1: (p.u_melting - p.u_evaporation) / (SQRT_PI * delta),
        k2: -(p.v_melting - p.v_far) / (SQRT_PI * tail),
    })
}

fn ex2_fronts(p: &TransformedProblem, tau1: f64, tau2: f64) -> Result<(f64, f64)> {
    let parts = ex2_parts(p, tau1, tau2, 0.0)?;
    let a = p.liquid_kind.coeff();
    let w = |tau: f64, u: f64| 2.0 / a * (tau * u + parts.k1 * (-tau * tau).exp());
    Ok((w(tau1, p.u_evaporation), w(tau2, p.u_melting)))
}

fn residual_ex2_terms(p: &TransformedProblem, tau1: f64, tau2: f64, nu2: f64) -> Result<ResidualTerms> {
    let Ex2Parts { k1, k2 } = ex2_parts(p, tau1, tau2, nu2)?;
    let (a, b) = (p.liquid_kind.coeff(), p.solid_kind.coeff());
    let (u1, u2, v2) = (p.u_evaporation, p.u_melting, p.v_melting);
    let (hv, hm, q0) = (p.latent_evaporation, p.latent_melting, p.flux_amplitude);
    let (omega1, _) = ex2_fronts(p, tau1, tau2)?;
    if !(omega1 > 0.0) {
        return Err(Error::Domain(format!("evaporation front w1 = {omega1} <= 0")));
    }
    let e1 = (-tau1 * tau1).exp();
    let e2 = (-tau2 * tau2).exp();
    let en = (-nu2 * nu2).exp();
    Ok(ResidualTerms {
        terms: vec![
            vec![k1 * a * a / u1 * e1, -k1 * hv * e1, -u1 * hv * tau1, a * q0],
            vec![k1 * a * a / u2 * e2, k1 * hm * e2, u2 * hm * tau2, -a * b * k2 / v2 * en],
            vec![
                2.0 / a * tau2 * u2,
                2.0 / a * k1 * e2,
                -2.0 / b * nu2 * v2,
                -2.0 / b * k2 * en,
            ],
        ],
    })
}

/// Raw and scaled residuals of the Example 2 system in `(tau1, tau2, nu2)`.
pub fn residual_ex2(
    p: &TransformedProblem,
    tau1: f64,
    tau2: f64,
    nu2: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = residual_ex2_terms(p, tau1, tau2, nu2)?;
    Ok((t.raw(), t.scaled()))
}

// ---------------------------------------------------------------------------
// Example 3

/// Intermediate quantities of the Example 3 pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ex3Inner {
    pub omega2: f64,
    /// `w2 Hm/2 + (w1 Hv/2 - q0) e^{a^2 (w1^2 - w2^2)/4}`: the solid-side flux at `w2`.
    pub flux2: f64,
    pub g2: f64,
    pub c3: f64,
}

pub fn ex3_inner(p: &TransformedProblem, omega1: f64, nu2: f64) -> Result<Ex3Inner> {
    if !(omega1 > 0.0 && nu2 > 0.0) {
        return Err(Error::Domain(format!(
            "need w1 > 0 and nu2 > 0, got {omega1}, {nu2}"
        )));
    }
    let a = p.liquid_kind.coeff();
    let b = p.solid_kind.coeff();
    let v2 = p.v_melting;
    let omega2 = nu2 * (-0.5 * v2).exp();
    check_ordered(omega1, omega2)?;
    let flux2 = 0.5 * omega2 * p.latent_melting
        + (0.5 * omega1 * p.latent_evaporation - p.flux_amplitude)
            * (0.25 * a * a * (omega1 * omega1 - omega2 * omega2)).exp();
    if !(flux2 > 0.0) {
        return Err(Error::SingularSystem(format!(
            "solid-side flux at the melting front is {flux2:e}; need > 0 for 2g - nu > 0"
        )));
    }
    // 2 g2 - nu2 = 2 e^{V2/2} / flux2
    let log_gap = std::f64::consts::LN_2 + 0.5 * v2 - flux2.ln();
    let gap = log_gap.exp();
    let g2 = 0.5 * nu2 + 0.5 * gap;
    let c3 = log_gap - nu2 / gap - 0.25 * b * b * nu2 * nu2;
    Ok(Ex3Inner {
        omega2,
        flux2,
        g2,
        c3,
    })
}

fn far_integral(b: f64, c3: f64, nu2: f64) -> Result<f64> {
    let mut failure = None;
    let width = (1.0 / b).min(1.0);
    let est = integrate_tail(
        |s| match solve_implicit_g(c3, b, s) {
            Ok(g) => 1.0 / g,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        nu2,
        width,
        TAIL_TOL,
        crate::similarity::TAIL_CUTOFF,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est?.value)
}

fn residual_ex3_terms(p: &TransformedProblem, omega1: f64, nu2: f64) -> Result<ResidualTerms> {
    let inner = ex3_inner(p, omega1, nu2)?;
    let c1 = liquid_erf_flux_coeff(p, omega1, inner.omega2)?;
    let tail = far_integral(p.solid_kind.coeff(), inner.c3, nu2)?;
    Ok(ResidualTerms {
        terms: vec![
            evaporation_terms(p, c1, omega1),
            vec![p.v_far, -p.v_melting, -tail],
        ],
    })
}

/// Raw and scaled residuals of the Example 3 system in `(w1, nu2)`.
pub fn residual_ex3(p: &TransformedProblem, omega1: f64, nu2: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = residual_ex3_terms(p, omega1, nu2)?;
    Ok((t.raw(), t.scaled()))
}

// ---------------------------------------------------------------------------
// solver

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Max-norm tolerance on the scaled residuals.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_backtracks: usize,
    /// Relative step below which iteration stops.
    pub step_tol: f64,
    /// Relative forward-difference step for the Jacobian.
    pub fd_step: f64,
    pub condition_limit: f64,
    pub scan_points: usize,
    /// Newton starts tried from the ranked scan candidates.
    pub scan_starts: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iterations: 100,
            max_backtracks: 30,
            step_tol: 1e-13,
            fd_step: 1e-6,
            condition_limit: 1e14,
            scan_points: 64,
            scan_starts: 8,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::param("tol", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be positive"));
        }
        if self.scan_points < 4 {
            return Err(Error::param("scan_points", "must be at least 4"));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::param("fd_step", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontSolveResult {
    pub case: FrontCase,
    pub unknown_names: Vec<String>,
    pub unknowns: Vec<f64>,
    pub omega1: f64,
    pub omega2: f64,
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    /// Max-norm of the scaled residuals from compensated sums.
    pub certified_norm: f64,
    pub iterations: usize,
    pub condition_estimate: f64,
    pub residual_history: Vec<f64>,
    pub scan: Option<ScanSummary>,
}

/// Outcome of the deterministic grid scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub points_per_axis: usize,
    pub feasible_points: usize,
    /// Connected groups of cells in which every residual changes sign.
    pub sign_change_clusters: usize,
    pub multiple_roots_suspected: bool,
    pub span_extensions: usize,
    /// Ranked starting points, best first.
    pub candidates: Vec<Vec<f64>>,
}

fn jacobian(sys: &FrontSystem, x: &[f64], r0: &[f64], opts: &SolveOptions) -> Result<Vec<f64>> {
    let n = x.len();
    let mut jac = vec![0.0; n * n];
    for j in 0..n {
        let h = opts.fd_step * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        xp[j] += h;
        let (col, step) = match sys.scaled_residuals(&xp) {
            Ok(r) => (r, h),
            Err(_) => {
                // near the edge of the feasible set: step the other way
                xp[j] = x[j] - h;
                (sys.scaled_residuals(&xp)?, -h)
            }
        };
        for i in 0..n {
            jac[i * n + j] = (col[i] - r0[i]) / step;
        }
    }
    Ok(jac)
}

/// Damped Newton from `x0`.
fn newton(sys: &FrontSystem, x0: &[f64], opts: &SolveOptions) -> Result<FrontSolveResult> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = sys.scaled_residuals(&x)?;
    let mut history = vec![max_abs(&r)];
    let mut condition = f64::NAN;
    let mut iterations = 0;
    loop {
        if max_abs(&r) < opts.tol {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::MaxIterations {
                iterations,
                residual: max_abs(&r),
            });
        }
        iterations += 1;
        let jac = jacobian(sys, &x, &r, opts)?;
        condition = condition_estimate(&jac, n);
        if !(condition <= opts.condition_limit) {
            return Err(Error::SingularJacobian { condition });
        }
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = solve_dense(&jac, &neg)?;
        let norm0 = norm2(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi + lambda * d).collect();
            if let Ok(rt) = sys.scaled_residuals(&trial) {
                if norm2(&rt) < norm0 {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((trial, rt)) = accepted else {
            return Err(Error::Stalled {
                residual: max_abs(&r),
            });
        };
        let rel_step = x
            .iter()
            .zip(&trial)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
            .fold(0.0, f64::max);
        x = trial;
        r = rt;
        history.push(max_abs(&r));
        if rel_step < opts.step_tol {
            if max_abs(&r) < 100.0 * opts.tol {
                break;
            }
            return Err(Error::Stalled {
                residual: max_abs(&r),
            });
        }
    }
    let terms = sys.terms(&x)?;
    let certified = max_abs(&terms.certified());
    if iterations == 0 {
        let jac = jacobian(sys, &x, &r, opts)?;
        condition = condition_estimate(&jac, n);
    }
    let (omega1, omega2) = sys.fronts(&x)?;
    if !(omega1 > 0.0 && omega2 > omega1) {
        return Err(Error::NonPhysicalRoot(format!(
            "root gives w1 = {omega1}, w2 = {omega2}; need 0 < w1 < w2"
        )));
    }
    Ok(FrontSolveResult {
        case: sys.case,
        unknown_names: sys.case.unknowns().iter().map(|s| s.to_string()).collect(),
        unknowns: x,
        omega1,
        omega2,
        residual_norm: max_abs(&r),
        residuals: r,
        certified_norm: certified,
        iterations,
        condition_estimate: condition,
        residual_history: history,
        scan: None,
    })
}

/// Solves the front system, from `guess` if given, otherwise from the
/// ranked candidates of [`bracket_scan`].
pub fn solve_fronts(sys: &FrontSystem, guess: Option<&[f64]>, opts: &SolveOptions) -> Result<FrontSolveResult> {
    opts.validate()?;
    if let Some(g) = guess {
        if g.len() != sys.case.dim() {
            return Err(Error::InvalidParameter {
                field: "guess".into(),
                reason: format!("expected {} unknowns, got {}", sys.case.dim(), g.len()),
            });
        }
        return newton(sys, g, opts);
    }
    let scan = bracket_scan(sys, opts)?;
    let mut first_err = None;
    for start in scan.candidates.iter().take(opts.scan_starts.max(1)) {
        match newton(sys, start, opts) {
            Ok(mut res) => {
                res.scan = Some(scan);
                return Ok(res);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or_else(|| Error::NoBracket("scan produced no candidates".into())))
}

// ---------------------------------------------------------------------------
// scan

/// Grid axes for the scan; `extension` widens the span axis by `10^extension`.
fn scan_axes(sys: &FrontSystem, n: usize, extension: usize) -> Result<Vec<Vec<f64>>> {
    let p = &sys.problem;
    let centers = |lo: f64, hi: f64| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
    };
    let log_centers = |lo: f64, hi: f64| -> Vec<f64> {
        let (l, h) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| (l + (h - l) * (i as f64 + 0.5) / n as f64).exp())
            .collect()
    };
    let grow = 10f64.powi(extension as i32);
    match sys.case {
        FrontCase::Ex1ConstConst | FrontCase::Ex3ConstExp => {
            // flux into the liquid at w1 is C1 e^{..} < 0 when U1 > U2, so
            // w1 Hv/2 - q0 < 0
            let w1_max = 2.0 * p.flux_amplitude / p.latent_evaporation;
            if !(w1_max > 0.0) || !w1_max.is_finite() {
                return Err(Error::NoBracket(format!(
                    "evaporation front bound 2 q0 / Hv = {w1_max} leaves no feasible w1"
                )));
            }
            let span = 10.0 * w1_max * grow;
            Ok(vec![centers(0.0, w1_max), log_centers(span * 1e-4 / grow, span)])
        }
        FrontCase::Ex2InvSqInvSq => Ok(vec![
            centers(-4.0, 4.0),
            log_centers(1e-3, 10.0 * grow),
            centers(-4.0, 4.0),
        ]),
    }
}

/// Maps grid coordinates (`w1`, `w2 - w1`, ...) to the system's unknowns.
fn grid_to_unknowns(sys: &FrontSystem, g: &[f64]) -> Vec<f64> {
    match sys.case {
        FrontCase::Ex1ConstConst => vec![g[0], g[0] + g[1]],
        FrontCase::Ex3ConstExp => vec![g[0], (g[0] + g[1]) * (0.5 * sys.problem.v_melting).exp()],
        FrontCase::Ex2InvSqInvSq => vec![g[0], g[0] + g[1], g[2]],
    }
}

fn unravel(mut idx: usize, n: usize, dim: usize) -> Vec<usize> {
    let mut out = vec![0; dim];
    for d in (0..dim).rev() {
        out[d] = idx % n;
        idx /= n;
    }
    out
}

fn ravel(ix: &[usize], n: usize) -> usize {
    ix.iter().fold(0, |acc, &i| acc * n + i)
}

struct Grid {
    n: usize,
    dim: usize,
    axes: Vec<Vec<f64>>,
    residuals: Vec<Option<Vec<f64>>>,
}

impl Grid {
    fn point(&self, ix: &[usize]) -> Vec<f64> {
        ix.iter().enumerate().map(|(d, &i)| self.axes[d][i]).collect()
    }

    fn corners(&self, cell: &[usize]) -> Vec<usize> {
        (0..1usize << self.dim)
            .map(|mask| {
                let ix: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .map(|(d, &c)| c + ((mask >> d) & 1))
                    .collect();
                ravel(&ix, self.n)
            })
            .collect()
    }
}

fn evaluate_grid(sys: &FrontSystem, n: usize, extension: usize) -> Result<Grid> {
    let axes = scan_axes(sys, n, extension)?;
    let dim = axes.len();
    let total = n.pow(dim as u32);
    let residuals = (0..total)
        .map(|k| {
            let ix = unravel(k, n, dim);
            let g: Vec<f64> = ix.iter().enumerate().map(|(d, &i)| axes[d][i]).collect();
            let x = grid_to_unknowns(sys, &g);
            sys.scaled_residuals(&x)
                .ok()
                .filter(|r| r.iter().all(|v| v.is_finite()))
        })
        .collect();
    Ok(Grid {
        n,
        dim,
        axes,
        residuals,
    })
}

/// Cells whose corners are all feasible and in which every residual takes
/// both signs, with their mean corner score.
fn sign_change_cells(grid: &Grid) -> Vec<(Vec<usize>, f64)> {
    let m = grid.n - 1;
    let mut out = Vec::new();
    for k in 0..m.pow(grid.dim as u32) {
        let cell = unravel(k, m, grid.dim);
        let corners = grid.corners(&cell);
        let rs: Option<Vec<&Vec<f64>>> = corners.iter().map(|&c| grid.residuals[c].as_ref()).collect();
        let Some(rs) = rs else { continue };
        let all_change = (0..rs[0].len()).all(|i| {
            rs.iter().any(|r| r[i] <= 0.0) && rs.iter().any(|r| r[i] >= 0.0)
        });
        if all_change {
            let score = rs.iter().map(|r| max_abs(r)).sum::<f64>() / rs.len() as f64;
            out.push((cell, score));
        }
    }
    out
}

fn count_clusters(cells: &[(Vec<usize>, f64)]) -> usize {
    let mut seen = vec![false; cells.len()];
    let mut clusters = 0;
    for start in 0..cells.len() {
        if seen[start] {
            continue;
        }
        clusters += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in 0..cells.len() {
                if !seen[j]
                    && cells[i]
                        .0
                        .iter()
                        .zip(&cells[j].0)
                        .all(|(a, b)| a.abs_diff(*b) <= 1)
                {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    clusters
}

/// Deterministic grid scan over the physically admissible region.
///
/// Candidates are centres of sign-change cells ranked by residual size,
/// followed by the best feasible grid nodes. The span axis (`w2 - w1`, or
/// `tau2 - tau1`) is widened up to three times when no sign change shows.
pub fn bracket_scan(sys: &FrontSystem, opts: &SolveOptions) -> Result<ScanSummary> {
    let n = opts.scan_points;
    let mut extension = 0;
    loop {
        let grid = evaluate_grid(sys, n, extension)?;
        let feasible = grid.residuals.iter().filter(|r| r.is_some()).count();
        let mut cells = sign_change_cells(&grid);
        if cells.is_empty() && extension < 3 {
            extension += 1;
            continue;
        }
        if feasible == 0 {
            return Err(Error::NoBracket(format!(
                "all {} scan points infeasible",
                grid.residuals.len()
            )));
        }
        let clusters = count_clusters(&cells);
        cells.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut candidates: Vec<Vec<f64>> = cells
            .iter()
            .map(|(cell, _)| {
                let lo = grid.point(cell);
                let hi = grid.point(&cell.iter().map(|c| c + 1).collect::<Vec<_>>());
                let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                grid_to_unknowns(sys, &mid)
            })
            .collect();
        let mut nodes: Vec<(usize, f64)> = grid
            .residuals
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.as_ref().map(|r| (k, max_abs(r))))
            .collect();
        nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (k, _) in nodes.into_iter().take(opts.scan_starts.max(1)) {
            let g = grid.point(&unravel(k, n, grid.dim));
            candidates.push(grid_to_unknowns(sys, &g));
        }
        return Ok(ScanSummary {
            points_per_axis: n,
            feasible_points: feasible,
            sign_change_clusters: clusters,
            multiple_roots_suspected: clusters > 1,
            span_extensions: extension,
            candidates,
        });
    }
}

// ---------------------------------------------------------------------------
// assembly

/// One boundary condition checked on an assembled solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCheck {
    pub condition: String,
    pub residual: f64,
}

/// Scaled difference `|lhs - rhs| / max(|lhs|, |rhs|, floor)`.
fn bc(condition: &str, lhs: f64, rhs: f64, floor: f64) -> BoundaryCheck {
    let scale = lhs.abs().max(rhs.abs()).max(floor);
    BoundaryCheck {
        condition: condition.into(),
        residual: if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale },
    }
}

/// Limit on scaled boundary residuals at assembly.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Checks every boundary condition of the reduced problem by direct
/// evaluation of the fitted profiles.
pub fn boundary_checks(sol: &SimilaritySolution) -> Result<Vec<BoundaryCheck>> {
    let p = &sol.problem;
    let (w1, w2) = (sol.omega1, sol.omega2);
    let (u_w1, u_w2, du1, du2, w_liq2) = match sol.liquid {
        PhaseProfile::Erf(e) => (e.value(w1), e.value(w2), e.slope(w1), e.slope(w2), w2),
        PhaseProfile::Power(pp) => {
            let (t1, t2) = (sol.tau1.unwrap_or(f64::NAN), sol.tau2.unwrap_or(f64::NAN));
            let (_, u1) = pp.eval(t1)?;
            let (wl, u2) = pp.eval(t2)?;
            (u1, u2, pp.slope(t1)?, pp.slope(t2)?, wl)
        }
        PhaseProfile::Exp(_) => return Err(Error::Domain("exp profile in the liquid".into())),
    };
    let (v_w2, dv2, v_far, w_sol2) = match sol.solid {
        PhaseProfile::Erf(e) => (e.value(w2), e.slope(w2), e.limit(), w2),
        PhaseProfile::Power(pp) => {
            let nu2 = sol.nu2.unwrap_or(f64::NAN);
            let (ws, v) = pp.eval(nu2)?;
            (v, pp.slope(nu2)?, pp.limit(), ws)
        }
        PhaseProfile::Exp(ep) => {
            let pt = ep.point(ep.nu_anchor)?;
            (pt.value, pt.slope, ep.limit()?.value, pt.omega)
        }
    };
    let evap_rhs = 0.5 * w1 * p.latent_evaporation - p.flux_amplitude;
    let stefan_rhs = du2 + 0.5 * w2 * p.latent_melting;
    Ok(vec![
        bc(
            "evaporation flux U'(w1) = w1 Hv/2 - q0",
            du1,
            evap_rhs,
            (0.5 * w1 * p.latent_evaporation).abs().max(p.flux_amplitude.abs()),
        ),
        bc("U(w1) = U1", u_w1, p.u_evaporation, 0.0),
        bc(
            "melting flux V'(w2) = U'(w2) + w2 Hm/2",
            dv2,
            stefan_rhs,
            du2.abs().max(0.5 * w2 * p.latent_melting),
        ),
        bc("U(w2) = U2", u_w2, p.u_melting, 0.0),
        bc("V(w2) = V2", v_w2, p.v_melting, 0.0),
        bc("V(inf) = V0", v_far, p.v_far, p.v_melting.abs()),
        bc("front match w(liquid) = w(solid) = w2", w_liq2, w_sol2, 0.0),
    ])
}

/// Fits the profiles for a converged root and validates all boundary
/// conditions.
pub fn assemble_solution(sys: &FrontSystem, res: &FrontSolveResult) -> Result<SimilaritySolution> {
    let p = sys.problem;
    let x = &res.unknowns;
    let (omega1, omega2) = sys.fronts(x)?;
    let mut sol = match sys.case {
        FrontCase::Ex1ConstConst => SimilaritySolution::new(
            p,
            PhaseProfile::Erf(fit_erf_liquid(&p, omega1, omega2)?),
            PhaseProfile::Erf(fit_erf_solid(&p, omega2)?),
            omega1,
            omega2,
        )?,
        FrontCase::Ex2InvSqInvSq => {
            let mut s = SimilaritySolution::new(
                p,
                PhaseProfile::Power(fit_power_liquid(&p, x[0], x[1])?),
                PhaseProfile::Power(fit_power_solid(&p, x[2])?),
                omega1,
                omega2,
            )?;
            s.tau1 = Some(x[0]);
            s.tau2 = Some(x[1]);
            s.nu2 = Some(x[2]);
            s
        }
        FrontCase::Ex3ConstExp => {
            let inner = ex3_inner(&p, x[0], x[1])?;
            let solid: ParametricExpProfile = exp_profile(&p, inner.c3, x[1])?;
            let mut s = SimilaritySolution::new(
                p,
                PhaseProfile::Erf(fit_erf_liquid(&p, omega1, omega2)?),
                PhaseProfile::Exp(solid),
                omega1,
                omega2,
            )?;
            s.nu2 = Some(x[1]);
            s
        }
    };
    if let PhaseProfile::Power(pp) = &mut sol.liquid {
        // keep the parametric range covering the solved fronts exactly
        pp.tau_lo = pp.tau_lo.min(x[0]);
        pp.tau_hi = pp.tau_hi.max(x[1]);
    }
    for check in boundary_checks(&sol)? {
        if !(check.residual <= BOUNDARY_TOL) {
            return Err(Error::BoundaryValidation {
                condition: check.condition,
                residual: check.residual,
            });
        }
    }
    Ok(sol)
}

/// Convenience: detect the case, solve, assemble.
pub fn solve_problem(p: &TransformedProblem, opts: &SolveOptions) -> Result<(FrontSolveResult, SimilaritySolution)> {
    let sys = FrontSystem::new(*p)?;
    let res = solve_fronts(&sys, None, opts)?;
    let sol = assemble_solution(&sys, &res)?;
    Ok((res, sol))
}

impl FrontSolveResult {
    pub fn phase_front(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Liquid => self.omega1,
            Phase::Solid => self.omega2,
        }
    }
}
