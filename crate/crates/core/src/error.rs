use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Variants carry enough context to
/// produce a machine-readable diagnosis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("evaluation did not converge: {0}")]
    NonConvergence(String),

    #[error("loss of precision: {0}")]
    LossOfPrecision(String),

    #[error("invalid sampled signal: {0}")]
    InvalidSignal(String),

    #[error("invalid actuator support: {0}")]
    Interval(String),

    #[error("invalid actuator location: {0}")]
    Location(String),

    #[error("target basis is rank deficient: {0}")]
    Rank(String),

    #[error("actuator is not strategic for the target; dead modes {dead_modes:?}")]
    NonStrategic { dead_modes: Vec<usize> },

    #[error("gramian is singular; dead modes {dead_modes:?}")]
    SingularGramian { dead_modes: Vec<usize> },

    #[error("kernel singularity is not square integrable for alpha = {alpha}")]
    NonIntegrableSingularity { alpha: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("terminal constraint is infeasible; dead modes {dead_modes:?}")]
    Infeasible { dead_modes: Vec<usize> },

    #[error("transfer missed the target: distance {distance:e} exceeds tolerance {tolerance:e}")]
    TransferMissed { distance: f64, tolerance: f64 },

    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit status used by the CLI and mirrored by the C ABI status codes.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonStrategic { .. } | Error::Infeasible { .. } => 2,
            Error::SingularGramian { .. } => 3,
            Error::Quadrature(_) | Error::NonIntegrableSingularity { .. } => 4,
            Error::Io(_) => 5,
            _ => 1,
        }
    }

    /// Short stable identifier for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Pole(_) => "pole",
            Error::Domain(_) => "domain",
            Error::NonConvergence(_) => "non_convergence",
            Error::LossOfPrecision(_) => "loss_of_precision",
            Error::InvalidSignal(_) => "invalid_signal",
            Error::Interval(_) => "interval",
            Error::Location(_) => "location",
            Error::Rank(_) => "rank",
            Error::NonStrategic { .. } => "non_strategic",
            Error::SingularGramian { .. } => "singular_gramian",
            Error::NonIntegrableSingularity { .. } => "non_integrable_singularity",
            Error::Quadrature(_) => "quadrature",
            Error::Infeasible { .. } => "infeasible",
            Error::TransferMissed { .. } => "transfer_missed",
            Error::Validation { .. } => "validation",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    pub fn dead_modes(&self) -> Option<&[usize]> {
        match self {
            Error::NonStrategic { dead_modes }
            | Error::SingularGramian { dead_modes }
            | Error::Infeasible { dead_modes } => Some(dead_modes),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
