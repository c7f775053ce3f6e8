use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical layers of the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integrand is not finite at node {index} ({node})")]
    NonFinite { index: usize, node: Complex64 },

    #[error("tolerance {tol:e} not reached: best estimate {estimate}, error bound {bound:e}")]
    Accuracy {
        estimate: Complex64,
        bound: f64,
        tol: f64,
    },

    #[error("point {0} lies outside the closed domain")]
    OutsideDomain(Complex64),

    #[error("region error: {0}")]
    Region(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("epsilon sequence does not converge: {0}")]
    Convergence(String),

    #[error("ill-conditioned reconstruction: residual {residual:e} exceeds {tol:e}")]
    Conditioning { residual: f64, tol: f64 },

    #[error("E(z, w) degenerates on the interior diagonal near {0}; evaluate H instead")]
    Diagonal(Complex64),
}

pub type Result<T> = std::result::Result<T, Error>;
