use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NonHermitian { asymmetry: f64 },

    #[error("{routine} did not converge within {budget} iterations")]
    NoConvergence { routine: &'static str, budget: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("map is not completely positive (Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCp { min_eigenvalue: f64 },

    #[error("map is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("map increases trace (largest eigenvalue of sum K^dag K is {max_eigenvalue:.6})")]
    TraceIncreasing { max_eigenvalue: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid observable: {reason} (residual {residual:.3e})")]
    InvalidObservable { reason: String, residual: f64 },

    #[error("observable is not commutative (commutator norm {norm:.3e})")]
    NotCommutative { norm: f64 },

    #[error("observable is not completely unsharp")]
    NotCompletelyUnsharp,

    #[error("state is not full rank (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotFullRank { min_eigenvalue: f64 },

    #[error("channel is not endomorphic ({dim_in} -> {dim_out})")]
    NotEndomorphic { dim_in: usize, dim_out: usize },

    #[error("no D <= {cap} satisfies rank(xi)^D * N <= M^D (N={n}, M={m}, rank={rank})")]
    InfeasibleDimensions { n: usize, m: usize, rank: usize, cap: u32 },

    #[error("operator subspace is not an algebra: {0}")]
    NotAnAlgebra(String),

    #[error("generic element failed to separate {0} after repeated resampling")]
    DegenerateCenter(String),

    #[error("effect block decomposition mismatch (residual {residual:.3e})")]
    DecompositionMismatch { residual: f64 },

    #[error("scheme does not implement the instrument (distance {distance:.3e})")]
    SchemeMismatch { distance: f64 },

    #[error("bad distribution: {0}")]
    BadDistribution(String),

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("model file: {0}")]
    Format(String),
}
