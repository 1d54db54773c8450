use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("expected a map of degree {expected}, got degree {actual}")]
    DegreeMismatch { expected: usize, actual: usize },
    #[error("composed degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: u128, cap: u128 },
    #[error("incidence matrix is not irreducible")]
    NotIrreducible,
    #[error("enumeration would produce {count} items, above the cap {cap}")]
    CountCapExceeded { count: u128, cap: u128 },
    #[error("malformed configuration: {0}")]
    Schema(String),
    #[error("invalid rational map: {0}")]
    InvalidMap(String),
    #[error("edge {0} carries an empty map family")]
    EmptyFamily(String),
    #[error("skew point has an empty word prefix")]
    EmptyWord,
    #[error("word is not admissible: {0}")]
    NotAdmissible(String),
    #[error("no seed point available for vertex {0}")]
    NoSeed(usize),
    #[error("root computation failed: {0}")]
    RootFailure(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("Newton derivative vanished at the iterate")]
    DerivativeSingular,
    #[error("no repelling periodic points of period {0}")]
    EmptyOrbitSet(usize),
    #[error("preimage fan incomplete: {0}")]
    BrokenLinks(String),
    #[error("pressure does not change sign on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("Julia cloud leaves the reference disc ({count} samples outside)")]
    CloudEscapesU { count: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
