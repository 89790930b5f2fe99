use thiserror::Error;

/// Failures reported by the core routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input outside the documented domain.
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    /// The real type overflowed while iterating; `index` is the first
    /// sequence index whose value was not finite.
    #[error("overflow at index {index}")]
    Overflow { index: i64 },
    #[error("interval with lo > hi or non-finite endpoint at position {0}")]
    InvalidInterval(usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    /// A band midpoint failed the trace test `|x_k| < 1`.
    #[error("band {band} failed midpoint verification")]
    BandVerification { band: usize },
    /// Edge isolation hit the precision floor before separating all edges.
    #[error("{count} band edges could not be separated at this precision")]
    UnresolvedEdges { count: usize },
    #[error("not found: {0}")]
    NotFound(&'static str),
    #[error("integer overflow in {0}")]
    IntegerOverflow(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
