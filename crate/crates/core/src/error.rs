//! Error types shared across the crate.

use core::fmt;

/// Errors produced by linear-algebra primitives, model construction, and the
/// evolution engines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix or vector dimensions do not fit the requested operation.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// A matrix that must be Hermitian deviates from its adjoint by more than
    /// the stated tolerance (max-norm of `m - m^dag`).
    NotHermitian { deviation: f64 },
    /// A state vector with (numerically) zero norm was used where a direction
    /// is required.
    DegenerateState,
    /// The cyclic Jacobi sweep did not reduce the off-diagonal mass below the
    /// convergence threshold within the sweep limit.
    EigenNoConvergence,
    /// Non-finite entries (NaN or infinity) encountered.
    NonFinite { context: &'static str },
    /// A matrix failed density-matrix validation (Hermiticity/trace/finiteness).
    InvalidDensity { detail: &'static str },
    /// A state vector failed normalization validation.
    InvalidState { norm_deviation: f64 },
    /// The deterministic integrator detected trace drift beyond tolerance.
    StepInstability { trace_drift: f64 },
    /// A decay rate was negative.
    NegativeRate { value: f64 },
    /// A jump channel fired with nonzero probability but the restricted
    /// post-jump product state has no direction (both reduced factors vanish).
    UndefinedPostJumpState { channel: usize },
    /// Configuration value out of range.
    InvalidConfig { detail: &'static str },
    /// Too few batches for a bootstrap estimate.
    TooFewBatches { found: usize },
    /// Time grids of two series do not match.
    GridMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                context,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch in {context}: expected {expected}, found {found}"
            ),
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (max deviation {deviation:e})")
            }
            Error::DegenerateState => write!(f, "zero-norm state has no direction"),
            Error::EigenNoConvergence => {
                write!(f, "Jacobi eigensolver did not converge")
            }
            Error::NonFinite { context } => write!(f, "non-finite values in {context}"),
            Error::InvalidDensity { detail } => write!(f, "invalid density matrix: {detail}"),
            Error::InvalidState { norm_deviation } => write!(
                f,
                "state vector not normalized (|norm - 1| = {norm_deviation:e})"
            ),
            Error::StepInstability { trace_drift } => write!(
                f,
                "integration step unstable (trace drift {trace_drift:e}); reduce the step size"
            ),
            Error::NegativeRate { value } => write!(f, "negative decay rate {value}"),
            Error::UndefinedPostJumpState { channel } => {
                write!(f, "undefined post-jump product state for channel {channel}")
            }
            Error::InvalidConfig { detail } => write!(f, "invalid configuration: {detail}"),
            Error::TooFewBatches { found } => {
                write!(f, "bootstrap needs at least 2 batches, found {found}")
            }
            Error::GridMismatch => write!(f, "time grids do not match"),
        }
    }
}

impl core::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
