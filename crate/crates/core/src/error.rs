use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in the library.
///
/// Variants split into two families: validation failures (bad input,
/// violated preconditions) and numeric failures (quadrature or root search
/// did not converge, a result came out non-finite). [`Error::is_numeric`]
/// tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid bet: {0}")]
    InvalidBet(String),

    #[error("absolute continuity violated: {0}")]
    AbsoluteContinuity(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("protocol violation in round {round}: {message}")]
    ProtocolViolation { round: usize, message: String },

    #[error("at theta = {theta}: {source}")]
    AtParameter {
        theta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric(_) => true,
            Error::AtParameter { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::InvalidBet(_) => "invalid_bet",
            Error::AbsoluteContinuity(_) => "absolute_continuity",
            Error::Unsupported(_) => "unsupported",
            Error::Calibration(_) => "calibration",
            Error::ProtocolViolation { .. } => "protocol_violation",
            Error::AtParameter { source, .. } => source.kind(),
            Error::InconsistentData(_) => "inconsistent_data",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::EmptySelection(_) => "empty_selection",
            Error::Numeric(_) => "numeric",
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
