//! Tripartite Bell-correlation toolkit.
//!
//! Generates behaviors P(abc|xyz) from three-qubit states and projective
//! dichotomic measurements, evaluates the Mermin family of witnesses together
//! with the Q quantity and the Svetlichny combination, tests membership in the
//! fully-local and two-way-local correlation polytopes by linear programming,
//! and runs the marginal-based genuine-entanglement certification rules.
//!
//! Conventions used throughout:
//! - outcome bit 0 maps to eigenvalue +1, bit 1 to eigenvalue −1;
//! - party order in tensor products is A⊗B⊗C;
//! - behavior tables are stored x-major, then y, z, a, b, c.

pub mod behavior;
pub mod par;
pub mod polytope;
pub mod quantum;
pub mod reference;
pub mod search;
pub mod simplex;
pub mod tensor;
pub mod witness;

/// Default tolerances. Algebraic identities get 1e-12, iterative routines
/// 1e-9; the remaining values are the certification defaults.
pub mod tol {
    /// Entrywise tolerance for exact algebraic identities.
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Tolerance for iteratively computed quantities (eigenvalues, optima).
    pub const ITERATIVE: f64 = 1e-9;
    /// Largest accepted no-signaling deviation for marginal queries.
    pub const NO_SIGNALING: f64 = 1e-8;
    /// Threshold below which a single-party marginal counts as maximally mixed.
    pub const MAX_MIXED: f64 = 1e-6;
    /// Half-width of the Mermin = 2√2 window used by certification.
    pub const MERMIN_CERT: f64 = 1e-3;
}

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max entrywise deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error("behavior is signaling (worst no-signaling deviation {deviation:.3e})")]
    Signaling { deviation: f64 },
    #[error("search failed: {0}")]
    Search(String),
}

pub type Result<T> = std::result::Result<T, Error>;
