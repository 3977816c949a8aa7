use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is singular")]
    Singular,

    #[error("form is not hyperbolic: {positive} positive and {negative} negative eigenvalues")]
    Signature { positive: usize, negative: usize },

    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("negative enumeration bound")]
    NegativeBound,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("point is not in the open cone V1")]
    NotInCone,

    #[error("minimal vectors span rank {rank} < {dim}")]
    Rank { rank: usize, dim: usize },

    #[error("direction is blind (lies in the closed cone V1)")]
    BlindDirection,

    #[error("lattice is not {p}-fillable: no element of order {p}^2 in the discriminant group")]
    NotFillable { p: u64 },

    #[error("orbit exceeded budget of {0} points")]
    OrbitBudget(usize),

    #[error("traversal exceeded budget of {0} classes")]
    ClassBudget(usize),

    #[error("entry out of range for the small-integer engine: {0}")]
    Overflow(String),

    #[error("internal error: {0}")]
    Internal(String),
}
