use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("q-expansion precision {have} too small, need at least {need}")]
    PrecisionTooSmall { have: usize, need: usize },
    #[error("weight {k}: T_2 has a repeated eigenvalue at working precision")]
    RepeatedEigenvalue { k: u32 },
    #[error("weight {k}: eigenvalue isolation failed ({detail})")]
    RootIsolation { k: u32, detail: String },
    #[error("eigenvalue table for weight {k} stops at n = {have}, need n = {need}")]
    InsufficientCoefficients { k: u32, have: usize, need: usize },
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("table-backed weight has no reliable second derivative")]
    TableWeight,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("maass data: {0}")]
    MaassFormat(String),
    #[error("maass data fails the Hecke relation at (m, n) = ({m}, {n}): residual {residual:e}")]
    MaassHecke { m: usize, n: usize, residual: f64 },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
