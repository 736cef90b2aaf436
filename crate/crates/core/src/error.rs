//! Error type shared by the whole crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A `SpinChainSpec` or derived parameter violates its invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// Vector or matrix dimensions do not match.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A dense eigensolver or factorization failed.
    #[error("linear algebra failure in {context}: {source}")]
    Linalg {
        context: String,
        #[source]
        source: ndarray_linalg::error::LinalgError,
    },

    /// The Faber coefficient tail did not drop below tolerance within the
    /// hard order cap; retry with a smaller time step.
    #[error(
        "Faber expansion tail above {tail_tol:e} after {max_order} terms; \
         reduce dt (currently {dt})"
    )]
    TailNotConverged {
        tail_tol: f64,
        max_order: usize,
        dt: f64,
    },

    /// An intermediate recurrence vector overflowed; the plan no longer
    /// matches the operator it is applied to.
    #[error("propagation overflow at {context}: norm {norm:e} exceeds 1e12; rebuild the plan")]
    Overflow { context: String, norm: f64 },

    /// The spectrum has no isolated maximal-imaginary level, so a unique
    /// steady state does not exist.
    #[error("no unique steady level: top imaginary parts within {gap:e} of each other")]
    NoSteadyLevel { gap: f64 },

    /// An operation refused to start because its estimated cost exceeds
    /// the configured guard.
    #[error("resource guard: {0}")]
    ResourceGuard(String),

    /// A numerical sanity check failed mid-computation.
    #[error("numerical check failed: {0}")]
    Numerical(String),

    /// Writing an output stream failed.
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn linalg(context: impl Into<String>) -> impl FnOnce(ndarray_linalg::error::LinalgError) -> Error {
        let context = context.into();
        move |source| Error::Linalg { context, source }
    }
}
