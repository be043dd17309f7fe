use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("diffusion coefficient {name} must be positive, got {value}")]
    NonPositiveDiffusion { name: &'static str, value: f64 },

    #[error(
        "mu1^2/(4 lambda1) + mu2^2/(4 lambda2) - gamma must be nonnegative, got beta = {beta}"
    )]
    NegativeBeta { beta: f64 },

    #[error("alpha must lie in (0,1), got {0}")]
    AlphaOutOfRange(f64),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid mesh parameters: {0}")]
    MeshParameters(String),

    #[error("local mesh ratio eta_{index} = {ratio} lies outside [3/4, 62]")]
    MeshRatio { index: usize, ratio: f64 },

    #[error("index {name} = {value} out of range {min}..={max}")]
    IndexOutOfRange {
        name: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("field dimensions {got:?} do not match mesh dimensions {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    #[error("dense oracle supports at most {max} interior unknowns, got {got}")]
    OracleTooLarge { max: usize, got: usize },

    #[error("dense factored system is singular")]
    SingularOracle,

    #[error("solver already reached the final time level {0}")]
    FinalLevelReached(usize),
}
