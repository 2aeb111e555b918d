use crate::functionals::DescentStep;
use crate::spectrum::SpectralResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("topology error: {0}")]
    Topology(String),

    #[error(
        "eigensolver did not converge after {} iterations (residual {:e})",
        .0.iterations,
        .0.residual
    )]
    Convergence(Box<SpectralResult>),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("volume mismatch: model volume {expected}, field domain volume {got}")]
    Volume { expected: f64, got: f64 },

    #[error("manifold carries no product structure")]
    Structure,

    #[error("Yamabe descent diverged after {} steps", .trace.len())]
    Descent { trace: Vec<DescentStep> },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn mesh(msg: impl Into<String>) -> Self {
        Error::Mesh(msg.into())
    }
}
