use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use stefan_core::fronts::{assemble_solution, boundary_checks, solve_fronts, solve_problem, BoundaryCheck, FrontSystem};
use stefan_core::material::build_transformed_problem;
use stefan_core::oracle::{compare, run, SampleError};
use stefan_core::similarity::{reconstruct_transformed, PhaseProfile};
use stefan_core::{Error, FrontSolveResult, MaterialModel, OracleConfig, Phase, SimilaritySolution, SolveOptions, TransformedProblem};

use crate::config::{Format, Loaded, RunConfig, VerifyBounds};
use crate::error::{model_error, CliError, Result};
use crate::output::{ensure_dir, write_json, Cell, Meta, Table};

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
}

/// A validated config with overrides applied and the front system built.
pub struct Session {
    pub config: RunConfig,
    pub hash: String,
    pub out: PathBuf,
    pub format: Format,
    pub system: FrontSystem,
}

impl Session {
    pub fn new(loaded: Loaded, ov: &Overrides) -> Result<Self> {
        let Loaded { mut config, hash } = loaded;
        if let Some(tol) = ov.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!("`--tol` must be positive, got {tol}")));
            }
            config.solver.tol = tol;
        }
        let system = config.system()?;
        Ok(Session {
            out: ov.out.clone().unwrap_or_else(|| config.output.dir.clone()),
            format: ov.format.unwrap_or(config.output.format),
            config,
            hash,
            system,
        })
    }

    pub fn meta(&self) -> Meta {
        Meta::new(&self.hash, self.system.case.tag(), self.material().is_some())
    }

    fn material(&self) -> Option<&MaterialModel> {
        self.config.temperature_model()
    }

    /// Solves and assembles; on failure writes `diagnostics.json`.
    pub fn solve(&self) -> Result<(FrontSolveResult, SimilaritySolution)> {
        let attempt = solve_fronts(&self.system, None, &self.config.solver)
            .and_then(|res| assemble_solution(&self.system, &res).map(|sol| (res, sol)));
        attempt.map_err(|e| {
            let diag = Diagnostics {
                error: e.to_string(),
                problem: self.system.problem,
                solver: self.config.solver,
            };
            if ensure_dir(&self.out).is_ok() {
                // best effort: the solver error is what gets reported
                let _ = write_json(&self.out.join("diagnostics.json"), &self.meta(), &diag);
            }
            CliError::Solver(e)
        })
    }
}

#[derive(Serialize)]
struct Diagnostics {
    error: String,
    problem: TransformedProblem,
    solver: SolveOptions,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

// ---------------------------------------------------------------------------
// solve

#[derive(Serialize)]
struct FrontsReport<'a> {
    #[serde(flatten)]
    result: &'a FrontSolveResult,
    tau1: Option<f64>,
    tau2: Option<f64>,
    nu2: Option<f64>,
    boundary_checks: Vec<BoundaryCheck>,
    problem: TransformedProblem,
    liquid_profile: PhaseProfile,
    solid_profile: PhaseProfile,
}

/// Transformed profiles: `U` on `[w1, w2]`, `V` on `[w2, 5 w2]`.
pub fn profile_table(sol: &SimilaritySolution, points: usize) -> Result<Table> {
    let mut t = Table::new(&["omega", "U", "V"]);
    for w in linspace(sol.omega1, sol.omega2, points) {
        let u = sol.value_in_phase(Phase::Liquid, w).map_err(CliError::Solver)?;
        t.push(vec![Cell::Num(w), Cell::Num(u), Cell::Empty]);
    }
    for w in linspace(sol.omega2, 5.0 * sol.omega2, points) {
        let v = sol.value_in_phase(Phase::Solid, w).map_err(CliError::Solver)?;
        t.push(vec![Cell::Num(w), Cell::Empty, Cell::Num(v)]);
    }
    Ok(t)
}

pub fn cmd_solve(s: &Session) -> Result<FrontSolveResult> {
    let (res, sol) = s.solve()?;
    ensure_dir(&s.out)?;
    let meta = s.meta();
    let report = FrontsReport {
        result: &res,
        tau1: sol.tau1,
        tau2: sol.tau2,
        nu2: sol.nu2,
        boundary_checks: boundary_checks(&sol).map_err(CliError::Solver)?,
        problem: sol.problem,
        liquid_profile: sol.liquid,
        solid_profile: sol.solid,
    };
    write_json(&s.out.join("fronts.json"), &meta, &report)?;
    profile_table(&sol, s.config.output.profile_points)?.write(&s.out, "profiles", &meta, s.format)?;
    Ok(res)
}

// ---------------------------------------------------------------------------
// field

/// Parses a comma-separated list of numbers; the empty string is the empty list.
pub fn parse_list(name: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("`{name}`: cannot parse `{s}` as a number")))
        })
        .collect()
}

/// `t, x, T, phase` rows. Points before the evaporation front are marked
/// `removed` with an empty `T`. Without explicit positions each time gets
/// `points` samples over `[0, 5 S2(t)]`.
pub fn field_table(
    sol: &SimilaritySolution,
    material: Option<&MaterialModel>,
    times: &[f64],
    xs: Option<&[f64]>,
    points: usize,
) -> Result<Table> {
    let mut table = Table::new(&["t", "x", "T", "phase"]);
    for &t in times {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("`--times`: times must be positive, got {t}")));
        }
        let grid: Vec<f64> = match xs {
            Some(xs) => xs.to_vec(),
            None => linspace(0.0, 5.0 * sol.front(Phase::Solid, t), points).collect(),
        };
        for x in grid {
            let row = match reconstruct_transformed(sol, t, x) {
                Ok(pt) => {
                    let value = match material {
                        Some(m) => m.temperature(pt.phase, pt.transformed).map_err(CliError::Solver)?,
                        None => pt.transformed,
                    };
                    vec![Cell::Num(t), Cell::Num(x), Cell::Num(value), Cell::Text(pt.phase.to_string())]
                }
                Err(Error::OutsideDomain(_)) => {
                    vec![Cell::Num(t), Cell::Num(x), Cell::Empty, Cell::Text("removed".into())]
                }
                Err(e) => return Err(CliError::Solver(e)),
            };
            table.push(row);
        }
    }
    Ok(table)
}

pub fn cmd_field(s: &Session, times: &[f64], xs: Option<&[f64]>) -> Result<PathBuf> {
    let (_, sol) = s.solve()?;
    let table = field_table(&sol, s.material(), times, xs, s.config.output.field_points)?;
    ensure_dir(&s.out)?;
    table.write(&s.out, "field", &s.meta(), s.format)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub bounds: VerifyBounds,
    pub oracle: OracleConfig,
    /// Relative perturbation applied to `w2` before the run (negative control).
    pub perturb_omega2: Option<f64>,
    pub omega1: f64,
    pub omega2: f64,
    pub steps: usize,
    pub max_energy_defect: f64,
    pub max_front_rel: f64,
    pub rms_front_rel: f64,
    pub max_field_rel: f64,
    pub rms_field_rel: f64,
    pub drift1: f64,
    pub drift2: f64,
    pub samples: Vec<SampleError>,
}

pub fn cmd_verify(s: &Session, perturb_omega2: Option<f64>) -> Result<VerifyReport> {
    let (_, mut sol) = s.solve()?;
    if let Some(p) = perturb_omega2 {
        let w2 = sol.omega2 * (1.0 + p);
        if !(p.is_finite() && w2 > sol.omega1) {
            return Err(CliError::Config(format!(
                "`--perturb-omega2` {p} would put w2 at or before w1"
            )));
        }
        sol.omega2 = w2;
    }
    let cfg = s.config.oracle;
    let bounds = s.config.verify;
    let material = s.material();
    ensure_dir(&s.out)?;
    let meta = s.meta();
    let traj = match run(&sol, &cfg) {
        Ok(t) => t,
        Err(e @ Error::FrontCollision { .. }) => return Err(CliError::Verification(e.to_string())),
        Err(e) => return Err(CliError::Solver(e)),
    };
    let rep = compare(&traj, &sol, material).map_err(CliError::Solver)?;
    let pass = rep.max_front_rel <= bounds.max_front_rel && rep.max_field_rel <= bounds.max_field_rel;
    let report = VerifyReport {
        pass,
        bounds,
        oracle: cfg,
        perturb_omega2,
        omega1: sol.omega1,
        omega2: sol.omega2,
        steps: traj.steps,
        max_energy_defect: traj.max_energy_defect,
        max_front_rel: rep.max_front_rel,
        rms_front_rel: rep.rms_front_rel,
        max_field_rel: rep.max_field_rel,
        rms_field_rel: rep.rms_field_rel,
        drift1: rep.drift1,
        drift2: rep.drift2,
        samples: rep.samples.clone(),
    };
    write_json(&s.out.join("verify.json"), &meta, &report)?;
    let mut fronts = Table::new(&["t", "s1", "s2", "omega1_hat", "omega2_hat"]);
    for p in &traj.samples {
        fronts.push([p.t, p.s1, p.s2, p.omega1_hat, p.omega2_hat].map(Cell::Num).to_vec());
    }
    fronts.write(&s.out, "oracle_fronts", &meta, s.format)?;
    if !pass {
        return Err(CliError::Verification(format!(
            "front error {:.3e} (limit {:.3e}), field error {:.3e} (limit {:.3e})",
            rep.max_front_rel, bounds.max_front_rel, rep.max_field_rel, bounds.max_field_rel
        )));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    #[value(name = "q0")]
    Q0,
    #[value(name = "Hv")]
    Hv,
    #[value(name = "Hm")]
    Hm,
    #[value(name = "T0")]
    T0,
}

impl SweepParam {
    fn apply(self, m: &mut MaterialModel, v: f64) {
        match self {
            SweepParam::Q0 => m.flux_amplitude = v,
            SweepParam::Hv => m.latent_evaporation = v,
            SweepParam::Hm => m.latent_melting = v,
            SweepParam::T0 => m.t_initial = v,
        }
    }
}

/// Sample values; a reversed range is swapped (the flag tells the caller
/// to warn). `n = 1` gives just the lower end.
pub fn sweep_values(lo: f64, hi: f64, n: usize) -> (Vec<f64>, bool) {
    let reversed = lo > hi;
    let (lo, hi) = if reversed { (hi, lo) } else { (lo, hi) };
    let values = if n == 1 { vec![lo] } else { linspace(lo, hi, n).collect() };
    (values, reversed)
}

/// One row per value, in order; failed points carry their error as status.
pub fn sweep_table(base: &MaterialModel, param: SweepParam, values: &[f64], opts: &SolveOptions) -> Table {
    let results: Vec<std::result::Result<FrontSolveResult, String>> = values
        .par_iter()
        .map(|&v| {
            let mut m = *base;
            param.apply(&mut m, v);
            build_transformed_problem(&m)
                .and_then(|p| solve_problem(&p, opts))
                .map(|(res, _)| res)
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut table = Table::new(&["param", "omega1", "omega2", "residual", "iterations", "status"]);
    for (&v, r) in values.iter().zip(results) {
        table.push(match r {
            Ok(res) => vec![
                Cell::Num(v),
                Cell::Num(res.omega1),
                Cell::Num(res.omega2),
                Cell::Num(res.residual_norm),
                Cell::Int(res.iterations),
                Cell::Text("ok".into()),
            ],
            // keep the CSV single-field
            Err(e) => vec![
                Cell::Num(v),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Text(format!("failed: {}", e.replace([',', '\n'], ";"))),
            ],
        });
    }
    table
}

pub fn cmd_sweep(s: &Session, param: SweepParam, lo: f64, hi: f64, n: usize) -> Result<PathBuf> {
    let base = match (&s.config.problem, &s.config.material) {
        (None, Some(m)) => *m,
        _ => {
            return Err(CliError::Config(
                "`sweep` varies material parameters and needs [material] without [problem]".into(),
            ))
        }
    };
    if n == 0 {
        return Err(CliError::Config("`--n` must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Config("`--range` endpoints must be finite".into()));
    }
    let (values, reversed) = sweep_values(lo, hi, n);
    if reversed {
        eprintln!("warning: sweep range given high-to-low; using [{}, {}]", values[0], values[values.len() - 1]);
    }
    // the base model must itself be valid; individual points may still fail
    build_transformed_problem(&base).map_err(model_error)?;
    let table = sweep_table(&base, param, &values, &s.config.solver);
    ensure_dir(&s.out)?;
    table.write(&s.out, "sweep", &s.meta(), s.format)
}
