use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |A_ij - conj(A_ji)| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not an effect (spectrum [{min:e}, {max:e}])")]
    NotAnEffect { min: f64, max: f64 },

    #[error("operator is not a projection (residual {residual:e})")]
    NotAProjection { residual: f64 },

    #[error("Hermitian eigensolver did not converge")]
    EigenSolver,

    #[error("invalid outcome grid: {0}")]
    InvalidGrid(String),

    #[error("cell index {index} out of range for a grid with {cells} cells")]
    IndexOutOfRange { index: usize, cells: usize },

    #[error("effects do not commute: ||[F({}), F({})]|| = {norm:e}", pair.0, pair.1)]
    NonCommuting { norm: f64, pair: (usize, usize) },

    #[error("malformed POVM: {0}")]
    MalformedPovm(String),

    #[error("joint diagonalization did not converge after {passes} refinement passes (residual {residual:e})")]
    RefinementFailure { passes: usize, residual: f64 },

    #[error("joint eigenspaces {0} and {1} cannot be separated")]
    SeparationFailure(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("kernel row {row} is not a probability vector (sum {sum})")]
    NonStochastic { row: usize, sum: f64 },

    #[error("digit {digit} at position {position} is not binary")]
    NonBinaryDigit { position: usize, digit: u8 },

    #[error("duplicate spectrum point {0}")]
    DuplicatePoint(f64),

    #[error("invalid kernel profile: {0}")]
    InvalidProfile(String),

    #[error("adaptive quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
