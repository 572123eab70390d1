use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A material or problem parameter violates its invariants.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("unsupported diffusivity: {0}")]
    UnsupportedDiffusivity(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation point lies outside the region where a parametric profile is monotone.
    #[error("monotonicity domain violated: {0}")]
    MonotonicityDomain(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("no root in [{lo}, {hi}]: {context}")]
    NoRoot { lo: f64, hi: f64, context: String },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("singular Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("Newton iteration stalled at residual {residual:e}")]
    Stalled { residual: f64 },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("root is not physical: {0}")]
    NonPhysicalRoot(String),

    #[error("boundary condition `{condition}` violated (scaled residual {residual:e})")]
    BoundaryValidation { condition: String, residual: f64 },

    #[error("point outside the material domain: {0}")]
    OutsideDomain(String),

    #[error("fronts collided at t = {t}")]
    FrontCollision { t: f64 },
}

impl Error {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
