//! Exact self-similar solutions of the two-phase Stefan problem for metal
//! melting and evaporation under an energy flux `q(t) = q0 / sqrt(t)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`material`]: per-phase coefficient models and the two-stage Kirchhoff
//!   transform `T -> u -> U` that turns the physical problem into the
//!   canonical reduced boundary value problem ([`TransformedProblem`]).
//! - [`similarity`]: the three closed-form profile families (error function,
//!   parametric power, parametric exponential) and field reconstruction.
//! - [`fronts`]: the transcendental systems for the front constants and a
//!   damped Newton solver seeded by a deterministic grid scan.
//! - [`oracle`]: an independent front-fixing finite-difference solver of the
//!   moving-boundary PDE, used to verify the similarity solutions.
//!
//! Small numerical building blocks live in [`special`], [`roots`], [`quad`]
//! and [`linalg`].

pub mod error;
pub mod fronts;
pub mod linalg;
pub mod material;
pub mod oracle;
pub mod quad;
pub mod roots;
pub mod similarity;
pub mod special;

pub use error::{Error, Result};
pub use fronts::{FrontCase, FrontSolveResult, FrontSystem, SolveOptions};
pub use material::{CoefficientFn, DiffusivityKind, MaterialModel, Phase, TransformedProblem};
pub use oracle::{OracleConfig, OracleState, OracleTrajectory};
pub use similarity::SimilaritySolution;
