//! Run configuration, read from a single TOML file.
//!
//! ```toml
//! [material]            # SI units throughout
//! Hv = 2.69e10          # J/m^3
//! Hm = 0.17e10          # J/m^3
//! Tv = 2793.0           # K
//! Tm = 933.0            # K
//! T0 = 300.0            # K
//! q0 = 2.5e8            # W s^1/2 / m^2
//! [material.liquid]
//! lambda = { kind = "constant", params = [240.0] }   # W/(m K)
//! C      = { kind = "constant", params = [2.7e6] }   # J/(m^3 K)
//! [material.solid]
//! lambda = { kind = "constant", params = [240.0] }
//! C      = { kind = "constant", params = [2.74e6] }
//!
//! [solver]     # optional, see SolveOptions
//! [oracle]     # optional, see OracleConfig
//! [verify]     # optional: max_front_rel, max_field_rel
//! [output]     # optional: dir, format, profile_points, field_points
//! [problem]    # optional: reduced problem used instead of [material]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use stefan_core::fronts::FrontSystem;
use stefan_core::material::build_transformed_problem;
use stefan_core::{FrontCase, MaterialModel, OracleConfig, SolveOptions, TransformedProblem};

use crate::error::{model_error, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
    /// Samples per phase in `profiles.*`.
    pub profile_points: usize,
    /// Samples per time in `field.*` when no positions are given.
    pub field_points: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            format: Format::Csv,
            profile_points: 200,
            field_points: 200,
        }
    }
}

/// Pass/fail limits of `verify`.
#[derive(Debug, Clone, Copy, Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyBounds {
    pub max_front_rel: f64,
    pub max_field_rel: f64,
}

impl Default for VerifyBounds {
    fn default() -> Self {
        VerifyBounds {
            max_front_rel: 1e-2,
            max_field_rel: 1e-2,
        }
    }
}

/// Reduced problem given directly, bypassing the material transform.
#[derive(Debug, Clone, Deserialize)]
pub struct ProblemOverride {
    /// Forces the front system; must agree with the diffusivity kinds.
    pub case: Option<FrontCase>,
    #[serde(flatten)]
    pub problem: TransformedProblem,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub material: Option<MaterialModel>,
    pub problem: Option<ProblemOverride>,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub verify: VerifyBounds,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A parsed config together with the SHA-256 of its bytes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
}

pub fn parse(text: &str) -> Result<Loaded> {
    let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(Loaded {
        config,
        hash: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.material.is_none() && self.problem.is_none() {
            return Err(CliError::Config("need a [material] or a [problem] section".into()));
        }
        if let Some(m) = &self.material {
            m.validate().map_err(model_error)?;
        }
        self.solver.validate().map_err(model_error)?;
        self.oracle.validate().map_err(model_error)?;
        for (name, v) in [
            ("verify.max_front_rel", self.verify.max_front_rel),
            ("verify.max_field_rel", self.verify.max_field_rel),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Config(format!("`{name}` must be positive, got {v}")));
            }
        }
        if self.output.profile_points < 2 || self.output.field_points < 2 {
            return Err(CliError::Config(
                "`output.profile_points` and `output.field_points` must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// The front system to solve: the `[problem]` override if present,
    /// otherwise the transformed material model.
    pub fn system(&self) -> Result<FrontSystem> {
        match (&self.problem, &self.material) {
            (Some(o), _) => {
                o.problem.validate().map_err(model_error)?;
                match o.case {
                    Some(case) => FrontSystem::with_case(case, o.problem),
                    None => FrontSystem::new(o.problem),
                }
                .map_err(model_error)
            }
            (None, Some(m)) => {
                let p = build_transformed_problem(m).map_err(model_error)?;
                FrontSystem::new(p).map_err(model_error)
            }
            (None, None) => Err(CliError::Config("need a [material] or a [problem] section".into())),
        }
    }

    /// Material for temperature output; absent when the problem is given
    /// directly (outputs are then in transformed variables).
    pub fn temperature_model(&self) -> Option<&MaterialModel> {
        match self.problem {
            Some(_) => None,
            None => self.material.as_ref(),
        }
    }
}
