use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    /// An iterative method ran out of budget before reaching its tolerance.
    #[error("{what} did not converge (reached {achieved:e}, requested {requested:e})")]
    NoConvergence {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },
    /// The spectrum form is not supported by this operation.
    #[error("unsupported spectrum form: {0}")]
    UnsupportedForm(&'static str),
    /// A covariance block lost positive definiteness.
    #[error("conditioning failed: {0}")]
    Conditioning(&'static str),
}
