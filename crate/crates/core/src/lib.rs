pub mod domain;
pub mod error;
pub mod field;
pub mod hilbert;
pub mod kernels;
pub mod laurent;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod verify;

pub use domain::{DomainKind, DomainSpec, TwoSidedSeries};
pub use error::{Error, Result};
pub use laurent::{LaurentTail, Truncation};
pub use num_complex::Complex64;
