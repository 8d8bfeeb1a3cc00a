use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value in curve {curve} at grid index {index}")]
    NonFiniteValue { curve: String, index: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("duplicate curve id {0:?}")]
    DuplicateId(String),
    #[error("cross-section at grid index {index} has zero spread")]
    DegenerateCrossSection { index: usize },
    #[error("p = 1 is handled by the closed form; no projection directions needed")]
    UseClosedForm,
    #[error("every projection direction has zero MAD")]
    DegenerateSample,
    #[error("singular scatter matrix")]
    SingularScatter,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no boundary geometry for dimension {0}; use norm-mode coordinates")]
    NoBoundaryGeometry(usize),
    #[error("covariance matrix is not positive definite even with jitter")]
    NotPositiveDefinite,
    #[error("unknown model id {0}; expected 1..=5")]
    UnknownModel(u32),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("replication {index} failed: {source}")]
    Replication { index: usize, source: Box<Error> },
}

impl Error {
    /// True for failures caused by degenerate numerics rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegenerateCrossSection { .. }
            | Error::DegenerateSample
            | Error::SingularScatter
            | Error::NotPositiveDefinite => true,
            Error::Replication { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
