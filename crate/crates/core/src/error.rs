//! Error type shared by all modules.

use nalgebra::Matrix4;
use thiserror::Error;

use crate::device::DesignReport;
use crate::schedules::RegimeCheck;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A time or value fell outside its documented domain.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Step halving drove the step size below the resolvable floor
    /// (1e-12 of the propagation span) before the tolerance was met.
    #[error("stiffness failure: step {step:.3e} below 1e-12 of span {span:.3e}")]
    Stiffness { span: f64, step: f64 },

    /// A numeric kernel (eigensolver) failed; the offending matrix is echoed.
    #[error("numerical failure: {context}; matrix:\n{matrix}")]
    Numerical {
        context: String,
        matrix: Box<Matrix4<f64>>,
    },

    /// Gate parameters violate the operating-regime inequalities.
    #[error("operating regime rejected: {0}")]
    RegimeRejected(Box<RegimeCheck>),

    /// Device parameters fail the design inequalities.
    #[error("design check rejected: {0}")]
    DesignRejected(Box<DesignReport>),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }
}
