//! Front-fixing finite-difference solver for the moving-boundary problem,
//! independent of the similarity reduction.
//!
//! The problem is integrated in the canonical variables, `D(U) U_t = U_xx`
//! in the liquid `S1 < x < S2` and `D(V) V_t = V_xx` in the solid
//! `S2 < x < R(t)`, with
//!
//! ```text
//! Hv S1' = U_x(S1) + q0/sqrt(t),   U(S1) = U1,
//! Hm S2' = V_x(S2) - U_x(S2),      U(S2) = U2, V(S2) = V2,
//! V(R) = V0,                       R = f S2.
//! ```
//!
//! Each phase is mapped onto a fixed unit interval (`xi = (x - S1)/(S2 - S1)`,
//! `eta = (x - S2)/((f - 1) S2)`), which adds advective terms from the
//! moving maps. Time stepping is theta-weighted with Picard iterations on
//! the front positions and on the nonlinear diffusivity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::material::{DiffusivityKind, MaterialModel, Phase, TransformedProblem};
use crate::similarity::SimilaritySolution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub n_liquid: usize,
    pub n_solid: usize,
    /// Solid domain ends at `R = far_field_factor * S2`.
    pub far_field_factor: f64,
    /// Fraction of the front-crossing limit `dx / |S'|` used as time step.
    pub cfl: f64,
    /// 0.5 = Crank-Nicolson, 1 = backward Euler.
    pub theta: f64,
    pub samples_per_decade: usize,
    pub picard_iterations: usize,
    pub picard_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            t_start: 1.0,
            t_end: 100.0,
            n_liquid: 256,
            n_solid: 256,
            far_field_factor: 10.0,
            cfl: 0.5,
            theta: 0.5,
            samples_per_decade: 10,
            picard_iterations: 8,
            picard_tol: 1e-13,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let param = Error::param;
        if !(self.t_start > 0.0 && self.t_start.is_finite()) {
            return Err(param("t_start", "must be positive"));
        }
        if !(self.t_end >= self.t_start && self.t_end.is_finite()) {
            return Err(param("t_end", "must be finite and not before t_start"));
        }
        if self.n_liquid < 16 {
            return Err(param("n_liquid", "need at least 16 cells"));
        }
        if self.n_solid < 16 {
            return Err(param("n_solid", "need at least 16 cells"));
        }
        if !(self.far_field_factor >= 10.0 && self.far_field_factor.is_finite()) {
            return Err(param("far_field_factor", "must be at least 10"));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(param("cfl", "must lie in (0, 1)"));
        }
        if !(self.theta >= 0.5 && self.theta <= 1.0) {
            return Err(param("theta", "must lie in [0.5, 1]"));
        }
        if self.samples_per_decade == 0 {
            return Err(param("samples_per_decade", "must be positive"));
        }
        if self.picard_iterations == 0 {
            return Err(param("picard_iterations", "must be positive"));
        }
        Ok(())
    }

    /// Same run with both grids and the time step refined by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        OracleConfig {
            n_liquid: self.n_liquid * factor,
            n_solid: self.n_solid * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleState {
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    /// Liquid `U` on `xi_i = i / n_liquid`.
    pub u_grid: Vec<f64>,
    /// Solid `V` on `eta_j = j / n_solid`.
    pub v_grid: Vec<f64>,
}

impl OracleState {
    pub fn omega_hat(&self) -> (f64, f64) {
        let r = self.t.sqrt();
        (self.s1 / r, self.s2 / r)
    }

    /// Physical positions of the liquid nodes.
    pub fn liquid_x(&self) -> Vec<f64> {
        let n = self.u_grid.len() - 1;
        let l = self.s2 - self.s1;
        (0..=n).map(|i| liquid_node(self.s1, l, i, n)).collect()
    }

    /// Physical positions of the solid nodes for far-field factor `f`.
    pub fn solid_x(&self, f: f64) -> Vec<f64> {
        let n = self.v_grid.len() - 1;
        (0..=n).map(|j| solid_node(self.s2, f, j, n)).collect()
    }
}

fn liquid_node(s1: f64, l: f64, i: usize, n: usize) -> f64 {
    if i == n {
        s1 + l
    } else {
        s1 + l * (i as f64 / n as f64)
    }
}

fn solid_node(s2: f64, f: f64, j: usize, n: usize) -> f64 {
    s2 * (1.0 + (f - 1.0) * (j as f64 / n as f64))
}

/// Fills the grids from a similarity solution at `t_start`.
pub fn init_from_similarity(sol: &SimilaritySolution, cfg: &OracleConfig) -> Result<OracleState> {
    cfg.validate()?;
    let t = cfg.t_start;
    let r = t.sqrt();
    let (s1, s2) = (sol.omega1 * r, sol.omega2 * r);
    let p = &sol.problem;
    let l = s2 - s1;
    let mut u_grid = Vec::with_capacity(cfg.n_liquid + 1);
    for i in 0..=cfg.n_liquid {
        let x = liquid_node(s1, l, i, cfg.n_liquid);
        u_grid.push(sol.value_in_phase(Phase::Liquid, x / r)?);
    }
    let mut v_grid = Vec::with_capacity(cfg.n_solid + 1);
    for j in 0..=cfg.n_solid {
        let x = solid_node(s2, cfg.far_field_factor, j, cfg.n_solid);
        v_grid.push(sol.value_in_phase(Phase::Solid, x / r)?);
    }
    u_grid[0] = p.u_evaporation;
    u_grid[cfg.n_liquid] = p.u_melting;
    v_grid[0] = p.v_melting;
    v_grid[cfg.n_solid] = p.v_far;
    Ok(OracleState {
        t,
        s1,
        s2,
        u_grid,
        v_grid,
    })
}

// ---------------------------------------------------------------------------
// one step

fn d_start(w: &[f64], h: f64) -> f64 {
    (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h)
}

fn d_end(w: &[f64], h: f64) -> f64 {
    let n = w.len() - 1;
    (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * h)
}

/// Physical boundary gradients and front velocities of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Fluxes {
    ux1: f64,
    ux2: f64,
    vx2: f64,
    vx_far: f64,
    v1: f64,
    v2: f64,
}

fn fluxes(p: &TransformedProblem, f: f64, t: f64, s1: f64, s2: f64, u: &[f64], v: &[f64]) -> Fluxes {
    let nl = u.len() - 1;
    let ns = v.len() - 1;
    let l = s2 - s1;
    let m = (f - 1.0) * s2;
    let ux1 = d_start(u, l / nl as f64);
    let ux2 = d_end(u, l / nl as f64);
    let vx2 = d_start(v, m / ns as f64);
    let vx_far = d_end(v, m / ns as f64);
    Fluxes {
        ux1,
        ux2,
        vx2,
        vx_far,
        v1: (ux1 + p.flux_amplitude / t.sqrt()) / p.latent_evaporation,
        v2: (vx2 - ux2) / p.latent_melting,
    }
}

/// Spatial operator coefficients at one time level for one phase.
struct Level<'a> {
    w: &'a [f64],
    /// `1 / (D(w_i) * len^2)`
    diff: Vec<f64>,
    /// advection velocity in mapped coordinates
    adv: Vec<f64>,
}

fn liquid_level<'a>(kind: DiffusivityKind, w: &'a [f64], s1: f64, s2: f64, v1: f64, v2: f64) -> Level<'a> {
    let n = w.len() - 1;
    let l = s2 - s1;
    let rate = v2 - v1;
    Level {
        w,
        diff: w.iter().map(|&x| 1.0 / (kind.eval(x) * l * l)).collect(),
        adv: (0..=n).map(|i| (v1 + (i as f64 / n as f64) * rate) / l).collect(),
    }
}

fn solid_level<'a>(kind: DiffusivityKind, w: &'a [f64], f: f64, s2: f64, v2: f64) -> Level<'a> {
    let n = w.len() - 1;
    let m = (f - 1.0) * s2;
    Level {
        w,
        diff: w.iter().map(|&x| 1.0 / (kind.eval(x) * m * m)).collect(),
        adv: (0..=n)
            .map(|j| v2 * (1.0 + (j as f64 / n as f64) * (f - 1.0)) / m)
            .collect(),
    }
}

/// Theta step for one phase with Dirichlet ends `left`, `right`.
fn advance_phase(old: &Level, new: &Level, dt: f64, theta: f64, left: f64, right: f64) -> Vec<f64> {
    let n = old.w.len() - 1;
    let h = 1.0 / n as f64;
    let mut lower = vec![0.0; n + 1];
    let mut diag = vec![1.0; n + 1];
    let mut upper = vec![0.0; n + 1];
    let mut rhs = vec![0.0; n + 1];
    rhs[0] = left;
    rhs[n] = right;
    let apply = |lev: &Level, i: usize| {
        let w = lev.w;
        lev.diff[i] * (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h) + lev.adv[i] * (w[i + 1] - w[i - 1]) / (2.0 * h)
    };
    for i in 1..n {
        let a = new.diff[i] / (h * h);
        let b = new.adv[i] / (2.0 * h);
        lower[i] = -dt * theta * (a - b);
        diag[i] = 1.0 + 2.0 * dt * theta * a;
        upper[i] = -dt * theta * (a + b);
        rhs[i] = old.w[i] + dt * (1.0 - theta) * apply(old, i);
    }
    solve_tridiagonal(&lower, &diag, &upper, &rhs)
}

/// Per-step energy balance of one phase: change of `int e(W) dx` against
/// the time-integrated boundary fluxes (including front motion).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyAudit {
    pub liquid_change: f64,
    pub liquid_flux: f64,
    pub solid_change: f64,
    pub solid_flux: f64,
    /// `|change - flux|` relative to the largest flux term, worst phase.
    pub relative_defect: f64,
}

fn trapezoid(values: &[f64], len: f64) -> f64 {
    let n = values.len() - 1;
    let inner: f64 = values[1..n].iter().sum();
    len / n as f64 * (inner + 0.5 * (values[0] + values[n]))
}

fn phase_energy(kind: DiffusivityKind, w: &[f64], len: f64) -> f64 {
    let e: Vec<f64> = w.iter().map(|&x| kind.energy(x)).collect();
    trapezoid(&e, len)
}

/// Boundary terms of `d/dt int e dx`, liquid and solid, with their sizes.
fn energy_rates(p: &TransformedProblem, f: f64, s: &OracleState, fl: &Fluxes) -> ([f64; 4], [f64; 4]) {
    let (kl, ks) = (p.liquid_kind, p.solid_kind);
    let nl = s.u_grid.len() - 1;
    let ns = s.v_grid.len() - 1;
    let liquid = [
        fl.ux2,
        -fl.ux1,
        kl.energy(s.u_grid[nl]) * fl.v2,
        -kl.energy(s.u_grid[0]) * fl.v1,
    ];
    let solid = [
        fl.vx_far,
        -fl.vx2,
        ks.energy(s.v_grid[ns]) * f * fl.v2,
        -ks.energy(s.v_grid[0]) * fl.v2,
    ];
    (liquid, solid)
}

/// Advances the solution over time steps; owns the problem data and config.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub problem: TransformedProblem,
    pub config: OracleConfig,
}

impl Oracle {
    pub fn new(problem: TransformedProblem, config: OracleConfig) -> Result<Self> {
        config.validate()?;
        problem.validate()?;
        Ok(Oracle { problem, config })
    }

    fn fluxes(&self, s: &OracleState) -> Fluxes {
        fluxes(
            &self.problem,
            self.config.far_field_factor,
            s.t,
            s.s1,
            s.s2,
            &s.u_grid,
            &s.v_grid,
        )
    }

    /// Time step from the front-crossing limit (the theta scheme has no
    /// diffusive stability limit for theta >= 1/2).
    pub fn stable_dt(&self, s: &OracleState) -> f64 {
        let fl = self.fluxes(s);
        let dx_l = (s.s2 - s.s1) / (s.u_grid.len() - 1) as f64;
        let dx_s = (self.config.far_field_factor - 1.0) * s.s2 / (s.v_grid.len() - 1) as f64;
        let mut limit = f64::INFINITY;
        for (dx, v) in [(dx_l, fl.v1), (dx_l, fl.v2), (dx_s, fl.v2)] {
            if v != 0.0 {
                limit = limit.min(dx / v.abs());
            }
        }
        self.config.cfl * limit
    }

    /// One theta step of size `dt`.
    pub fn step_by(&self, s: &OracleState, dt: f64) -> Result<OracleState> {
        self.step_audited(s, dt).map(|(next, _)| next)
    }

    /// One step with its energy audit.
    pub fn step_audited(&self, s: &OracleState, dt: f64) -> Result<(OracleState, EnergyAudit)> {
        let cfg = &self.config;
        let p = &self.problem;
        let f = cfg.far_field_factor;
        let theta = cfg.theta;
        let t_new = s.t + dt;
        let fl0 = self.fluxes(s);
        let old_l = liquid_level(p.liquid_kind, &s.u_grid, s.s1, s.s2, fl0.v1, fl0.v2);
        let old_s = solid_level(p.solid_kind, &s.v_grid, f, s.s2, fl0.v2);

        let mut s1 = s.s1 + dt * fl0.v1;
        let mut s2 = s.s2 + dt * fl0.v2;
        let (mut v1, mut v2) = (fl0.v1, fl0.v2);
        let mut u = s.u_grid.clone();
        let mut v = s.v_grid.clone();
        for _ in 0..cfg.picard_iterations {
            if !(s2 > s1 && s1.is_finite() && s2.is_finite()) {
                return Err(Error::FrontCollision { t: t_new });
            }
            let new_l = liquid_level(p.liquid_kind, &u, s1, s2, v1, v2);
            let new_s = solid_level(p.solid_kind, &v, f, s2, v2);
            let u_next = advance_phase(&old_l, &new_l, dt, theta, p.u_evaporation, p.u_melting);
            let v_next = advance_phase(&old_s, &new_s, dt, theta, p.v_melting, p.v_far);
            let fl = fluxes(p, f, t_new, s1, s2, &u_next, &v_next);
            let s1_next = s.s1 + dt * ((1.0 - theta) * fl0.v1 + theta * fl.v1);
            let s2_next = s.s2 + dt * ((1.0 - theta) * fl0.v2 + theta * fl.v2);
            let change = (s1_next - s1).abs().max((s2_next - s2).abs());
            u = u_next;
            v = v_next;
            s1 = s1_next;
            s2 = s2_next;
            v1 = fl.v1;
            v2 = fl.v2;
            if change <= cfg.picard_tol * s2.abs() {
                break;
            }
        }
        if !(s2 > s1) || u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::FrontCollision { t: t_new });
        }
        let next = OracleState {
            t: t_new,
            s1,
            s2,
            u_grid: u,
            v_grid: v,
        };
        let audit = self.audit(s, &next, &fl0);
        Ok((next, audit))
    }

    fn audit(&self, prev: &OracleState, next: &OracleState, fl0: &Fluxes) -> EnergyAudit {
        let p = &self.problem;
        let f = self.config.far_field_factor;
        let theta = self.config.theta;
        let dt = next.t - prev.t;
        let fl1 = self.fluxes(next);
        let (l0, s0) = energy_rates(p, f, prev, fl0);
        let (l1, s1) = energy_rates(p, f, next, &fl1);
        let weighted = |a: &[f64; 4], b: &[f64; 4]| -> (f64, f64) {
            let total = (0..4).map(|k| (1.0 - theta) * a[k] + theta * b[k]).sum::<f64>() * dt;
            let size = (0..4).map(|k| a[k].abs().max(b[k].abs())).fold(0.0, f64::max) * dt;
            (total, size)
        };
        let (liquid_flux, l_size) = weighted(&l0, &l1);
        let (solid_flux, s_size) = weighted(&s0, &s1);
        let liquid_change = phase_energy(p.liquid_kind, &next.u_grid, next.s2 - next.s1)
            - phase_energy(p.liquid_kind, &prev.u_grid, prev.s2 - prev.s1);
        let solid_change = phase_energy(p.solid_kind, &next.v_grid, (f - 1.0) * next.s2)
            - phase_energy(p.solid_kind, &prev.v_grid, (f - 1.0) * prev.s2);
        let rel = |change: f64, flux: f64, size: f64| {
            if size == 0.0 {
                (change - flux).abs()
            } else {
                (change - flux).abs() / size
            }
        };
        EnergyAudit {
            liquid_change,
            liquid_flux,
            solid_change,
            solid_flux,
            relative_defect: rel(liquid_change, liquid_flux, l_size).max(rel(solid_change, solid_flux, s_size)),
        }
    }

    /// Sample times: geometric with `samples_per_decade`, ending at `t_end`.
    pub fn sample_times(&self) -> Vec<f64> {
        let cfg = &self.config;
        let mut times = vec![cfg.t_start];
        if cfg.t_end > cfg.t_start {
            let decades = (cfg.t_end / cfg.t_start).log10();
            let count = ((decades * cfg.samples_per_decade as f64).ceil() as usize).max(1);
            for k in 1..count {
                times.push(cfg.t_start * (cfg.t_end / cfg.t_start).powf(k as f64 / count as f64));
            }
            times.push(cfg.t_end);
        }
        times
    }

    /// Integrates from `state` to `t_end`, recording samples.
    pub fn run_from(&self, state: OracleState) -> Result<OracleTrajectory> {
        let times = self.sample_times();
        let mut s = state;
        let mut samples = vec![OracleSample::from_state(&s)];
        let mut steps = 0usize;
        let mut max_defect = 0.0f64;
        for &target in &times[1..] {
            while s.t < target {
                let dt = self.stable_dt(&s);
                let remaining = target - s.t;
                // avoid a sliver step just before the sample time
                let dt = if dt >= remaining || dt.is_infinite() {
                    remaining
                } else if 2.0 * dt > remaining {
                    0.5 * remaining
                } else {
                    dt
                };
                let (mut next, audit) = self.step_audited(&s, dt)?;
                if dt == remaining {
                    next.t = target;
                }
                max_defect = max_defect.max(audit.relative_defect);
                s = next;
                steps += 1;
            }
            samples.push(OracleSample::from_state(&s));
        }
        Ok(OracleTrajectory {
            config: self.config,
            far_field_factor: self.config.far_field_factor,
            samples,
            steps,
            max_energy_defect: max_defect,
        })
    }
}

/// One theta step with the automatic time step.
pub fn step(state: &OracleState, problem: &TransformedProblem, cfg: &OracleConfig) -> Result<OracleState> {
    let oracle = Oracle::new(*problem, *cfg)?;
    let dt = oracle.stable_dt(state);
    let dt = if dt.is_finite() { dt } else { cfg.t_end - state.t };
    oracle.step_by(state, dt)
}

/// Runs the oracle from similarity initial data.
pub fn run(sol: &SimilaritySolution, cfg: &OracleConfig) -> Result<OracleTrajectory> {
    let oracle = Oracle::new(sol.problem, *cfg)?;
    oracle.run_from(init_from_similarity(sol, cfg)?)
}

// ---------------------------------------------------------------------------
// trajectories and comparison

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSample {
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    pub omega1_hat: f64,
    pub omega2_hat: f64,
    pub u_grid: Vec<f64>,
    pub v_grid: Vec<f64>,
}

impl OracleSample {
    fn from_state(s: &OracleState) -> Self {
        let (w1, w2) = s.omega_hat();
        OracleSample {
            t: s.t,
            s1: s.s1,
            s2: s.s2,
            omega1_hat: w1,
            omega2_hat: w2,
            u_grid: s.u_grid.clone(),
            v_grid: s.v_grid.clone(),
        }
    }

    pub fn state(&self) -> OracleState {
        OracleState {
            t: self.t,
            s1: self.s1,
            s2: self.s2,
            u_grid: self.u_grid.clone(),
            v_grid: self.v_grid.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleTrajectory {
    pub config: OracleConfig,
    pub far_field_factor: f64,
    pub samples: Vec<OracleSample>,
    pub steps: usize,
    /// Worst per-step relative energy-balance defect.
    pub max_energy_defect: f64,
}

impl OracleTrajectory {
    /// CSV with columns `t,s1,s2,omega1_hat,omega2_hat`.
    pub fn fronts_csv(&self) -> String {
        let mut out = String::from("t,s1,s2,omega1_hat,omega2_hat\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.t, s.s1, s.s2, s.omega1_hat, s.omega2_hat
            ));
        }
        out
    }

    /// CSV with columns `t,x,T,phase`; `T` is the physical temperature when
    /// a material is given, the transformed value otherwise.
    pub fn fields_csv(&self, material: Option<&MaterialModel>) -> Result<String> {
        let mut out = String::from("t,x,T,phase\n");
        for s in &self.samples {
            let st = s.state();
            for (phase, xs, ws) in [
                (Phase::Liquid, st.liquid_x(), &s.u_grid),
                (Phase::Solid, st.solid_x(self.far_field_factor), &s.v_grid),
            ] {
                for (x, w) in xs.iter().zip(ws.iter()) {
                    let value = match material {
                        Some(m) => m.temperature(phase, *w)?,
                        None => *w,
                    };
                    out.push_str(&format!("{:.16e},{:.16e},{:.16e},{}\n", s.t, x, value, phase));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleError {
    pub t: f64,
    pub omega1_hat: f64,
    pub omega2_hat: f64,
    pub front1_rel: f64,
    pub front2_rel: f64,
    pub field_linf_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub samples: Vec<SampleError>,
    pub max_front_rel: f64,
    pub rms_front_rel: f64,
    pub max_field_rel: f64,
    pub rms_field_rel: f64,
    /// `(w_hat(t_end) - w_hat(t_start)) / w` per front.
    pub drift1: f64,
    pub drift2: f64,
}

impl CompareReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("t,omega1_hat,omega2_hat,front1_rel,front2_rel,field_linf_rel\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.t, s.omega1_hat, s.omega2_hat, s.front1_rel, s.front2_rel, s.field_linf_rel
            ));
        }
        out
    }
}

fn sample_field_error(
    traj: &OracleTrajectory,
    sample: &OracleSample,
    sol: &SimilaritySolution,
    material: Option<&MaterialModel>,
) -> Result<f64> {
    let st = sample.state();
    let r = sample.t.sqrt();
    let mut worst = 0.0f64;
    let mut size = 0.0f64;
    for (phase, xs, ws) in [
        (Phase::Liquid, st.liquid_x(), &sample.u_grid),
        (Phase::Solid, st.solid_x(traj.far_field_factor), &sample.v_grid),
    ] {
        for (x, w) in xs.iter().zip(ws.iter()) {
            let exact = sol.value_in_phase(phase, x / r)?;
            let (num, ex) = match material {
                Some(m) => (m.temperature(phase, *w)?, m.temperature(phase, exact)?),
                None => (*w, exact),
            };
            worst = worst.max((num - ex).abs());
            size = size.max(ex.abs());
        }
    }
    Ok(if size == 0.0 { worst } else { worst / size })
}

/// Front and field errors of a trajectory against a similarity solution.
/// Fields are compared in temperature when `material` is given.
pub fn compare(
    traj: &OracleTrajectory,
    sol: &SimilaritySolution,
    material: Option<&MaterialModel>,
) -> Result<CompareReport> {
    let mut samples = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        samples.push(SampleError {
            t: s.t,
            omega1_hat: s.omega1_hat,
            omega2_hat: s.omega2_hat,
            front1_rel: (s.omega1_hat - sol.omega1).abs() / sol.omega1,
            front2_rel: (s.omega2_hat - sol.omega2).abs() / sol.omega2,
            field_linf_rel: sample_field_error(traj, s, sol, material)?,
        });
    }
    let n = samples.len().max(1) as f64;
    let front = |e: &SampleError| e.front1_rel.max(e.front2_rel);
    let (first, last) = (traj.samples.first(), traj.samples.last());
    let (drift1, drift2) = match (first, last) {
        (Some(a), Some(b)) => (
            (b.omega1_hat - a.omega1_hat) / sol.omega1,
            (b.omega2_hat - a.omega2_hat) / sol.omega2,
        ),
        _ => (0.0, 0.0),
    };
    Ok(CompareReport {
        max_front_rel: samples.iter().map(front).fold(0.0, f64::max),
        rms_front_rel: (samples.iter().map(|e| front(e).powi(2)).sum::<f64>() / n).sqrt(),
        max_field_rel: samples.iter().map(|e| e.field_linf_rel).fold(0.0, f64::max),
        rms_field_rel: (samples.iter().map(|e| e.field_linf_rel.powi(2)).sum::<f64>() / n).sqrt(),
        drift1,
        drift2,
        samples,
    })
}
