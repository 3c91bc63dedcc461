use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coefficient in symbol")]
    NonFinite,

    #[error("exponent real part {0} exceeds the double range")]
    Overflow(f64),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("exp argument at position {position} is not a polynomial of degree <= 2")]
    Degree { position: usize },

    #[error("invalid power at position {position}: only non-negative integer powers are allowed")]
    Power { position: usize },

    #[error("star product is non-terminating for this operand pair ({0})")]
    NonTerminating(String),

    #[error("singular Gaussian kernel (|det| = {0:e})")]
    SingularGaussian(f64),

    #[error("square-root branch is ambiguous along the Gaussian flow")]
    BranchAmbiguity,

    #[error("ad-image is not proportional to its input (residual {0:e})")]
    NotEigen(f64),

    #[error("propagator singular at t = {0}")]
    SingularTime(f64),

    #[error("n + n' = {0} exceeds the degree guard of 12")]
    DegreeGuard(usize),

    #[error("ansatz eigenvalue has negative imaginary part ({0})")]
    Positivity(f64),

    #[error("grid specs do not match")]
    GridMismatch,

    #[error("invalid grid spec: {0}")]
    InvalidGrid(String),

    #[error("star series diverges: last term {last:e} vs partial sum {partial:e}")]
    Divergence { last: f64, partial: f64 },

    #[error("CFL number {0} exceeds 0.5")]
    Cfl(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Format(String),
}
