use thiserror::Error;

/// Errors produced by the solver toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("density has non-positive mass {mass:e}; the upstream solve failed")]
    NonPositiveMass { mass: f64 },

    #[error(
        "linear system is singular or ill-conditioned (condition estimate {estimate:e}); \
         refine the grid or change the parameters"
    )]
    IllConditioned { estimate: f64 },

    #[error(
        "solution has negative mass fraction {fraction:e} (most negative value {min_value:e}); \
         the discretization is under-resolved"
    )]
    NegativeDensity { fraction: f64, min_value: f64 },

    #[error("transient solver did not converge in {steps} steps (last residual {residual:e})")]
    NotConverged { steps: usize, residual: f64 },

    #[error("quadrature did not reach tolerance on [{a}, {b}]: error estimate {estimate:e}")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("path {path} reached a non-finite state at step {step}; use a smaller time step")]
    NonFiniteState { path: usize, step: usize },

    #[error("no samples fell inside the grid")]
    NoInDomainSamples,

    #[error("density has zero variance")]
    DegenerateVariance,

    #[error("alpha bracket [{lo}, {hi}] does not straddle a modality change (modality {modality} at both ends)")]
    Bracket { lo: f64, hi: f64, modality: usize },

    #[error("bisection failed inside bracket [{lo}, {hi}]: {source}")]
    Bisection {
        lo: f64,
        hi: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("every sweep point failed; first error: {first}")]
    SweepFailed { first: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::GridMismatch => "grid_mismatch",
            Error::NonPositiveMass { .. } => "non_positive_mass",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::NegativeDensity { .. } => "negative_density",
            Error::NotConverged { .. } => "not_converged",
            Error::Quadrature { .. } => "quadrature",
            Error::NonFiniteState { .. } => "non_finite_state",
            Error::NoInDomainSamples => "no_in_domain_samples",
            Error::DegenerateVariance => "degenerate_variance",
            Error::Bracket { .. } => "bracket",
            Error::Bisection { .. } => "bisection",
            Error::SweepFailed { .. } => "sweep_failed",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
