use thiserror::Error;

/// Errors reported by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spin 2j={twice_j} is incompatible with {n} coupled spin-1/2 systems (parity or range)")]
    IncompatibleSpin { n: u32, twice_j: u32 },

    #[error("{name} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("copy count must be at least 1")]
    EmptySpectrum,

    #[error("block index {index} out of range for {count} blocks")]
    BlockIndex { index: usize, count: usize },

    #[error("posterior undefined: outcome has zero marginal probability")]
    UndefinedPosterior,

    #[error("invalid prior density: {0}")]
    InvalidPrior(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("parameter map is not strictly monotone on [0, 1]")]
    NonMonotoneMap,

    #[error("asymptote fit needs {0}")]
    InsufficientFitData(&'static str),

    #[error("oracle refuses N={n}: matrix dimension {dim} exceeds the desk-scale limit {limit}")]
    OracleDimension { n: u32, dim: usize, limit: usize },

    #[error(
        "ambiguous eigenvalue clustering (smallest gap {gap:.3e} < 10x tolerance {tol:.3e}); \
         try a different reference b"
    )]
    AmbiguousClustering { gap: f64, tol: f64 },

    #[error("numeric range exceeded: {0}")]
    NumericRange(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
