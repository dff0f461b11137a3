use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The query matrix puts (numerically) zero mass on every vector.
    #[error("quadratic form has zero total mass")]
    ZeroMass,

    #[error("query matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is numerically rank deficient (pivot ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("under-determined system: {samples} samples for {unknowns} unknowns")]
    UnderDetermined { samples: usize, unknowns: usize },

    #[error("barrier walk exceeded the iteration cap of {cap}")]
    IterationCapExceeded { cap: usize },

    #[error("spectrum [{lambda_min:e}, {lambda_max:e}] left the barrier interval ({lower:e}, {upper:e})")]
    BarrierViolation {
        lambda_min: f64,
        lambda_max: f64,
        lower: f64,
        upper: f64,
    },

    #[error("coefficient box holds {count} points, above the enumeration limit")]
    CoefficientBoxOverflow { count: f64 },

    #[error("{count} candidate frequencies exceed the cap of {cap}")]
    CandidateExplosion { count: usize, cap: usize },

    #[error("Vandermonde system is singular after {retries} projection retries")]
    SingularSystem { retries: usize },
}
