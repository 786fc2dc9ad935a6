use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input matrix is not unitary (deviation {0:.3e})")]
    NonUnitaryInput(f64),
    #[error("input matrix is not symplectic (deviation {0:.3e})")]
    NotSymplectic(f64),
    #[error("input matrix is not symmetric (deviation {0:.3e})")]
    NotSymmetric(f64),
    #[error("input matrix is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("input matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitianInput(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ladder word of length {0} exceeds the supported maximum")]
    WordTooLong(usize),
    #[error("unsupported moment degree {0}")]
    UnsupportedDegree(usize),
    #[error("found only {found} of {needed} independent columns")]
    InsufficientColumns { found: usize, needed: usize },
    #[error("rounded occupation {0} is negative")]
    NegativeOccupation(i64),
    #[error("eigenvalue {0} sits on a rounding boundary")]
    RoundingAmbiguous(f64),
    #[error("covariance violates the uncertainty relation (symplectic eigenvalue {0:.6})")]
    NotACovariance(f64),
    #[error("matrix of dimension {0} is too large for this operation")]
    TooLarge(usize),
    #[error("photon numbers differ: {0} vs {1}")]
    PhotonNumberMismatch(u64, u64),
    #[error("{0} photons exceed the supported maximum")]
    TooManyPhotons(u64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("truncation cutoff too small (leakage {0:.3e})")]
    CutoffTooSmall(f64),
    #[error("moment of degree {0} is missing")]
    MissingMoment(usize),
    #[error("total degree {0} is odd")]
    OddTotalDegree(usize),
    #[error("tensor degree {got} does not match the requested operation (expected {expected})")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("moment set is incomplete: {0}")]
    IncompleteMoments(String),
    #[error("first moments are nonzero (norm {0:.3e}); central moments are required")]
    NonzeroFirstMoment(f64),
    #[error("linear system is rank deficient (rank {rank} of {unknowns})")]
    RankDeficient { rank: usize, unknowns: usize },
    #[error("invalid data: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
