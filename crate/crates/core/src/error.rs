use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("lambda = {0} is a band edge (branch point of the free m-function)")]
    BranchPoint(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of the m-function hit at lambda = {0}")]
    PoleHit(f64),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("potential has unbounded support; truncate it first")]
    UnboundedSupport,

    #[error("extrapolation residual {residual:e} exceeds tolerance {tol:e}")]
    Extrapolation { residual: f64, tol: f64 },

    #[error("quadrature did not reach tolerance {tol:e}: estimate {estimate}, error {error:e}")]
    Tolerance { estimate: f64, error: f64, tol: f64 },

    #[error("unresolved root bracket near lambda = {0}")]
    UnresolvedBracket(f64),

    #[error("evaluation point coincides with a listed pole at z = {0}")]
    PoleEvaluation(f64),

    #[error("contour passes within {distance:e} of eigenvalue {eigenvalue}")]
    SingularResolvent { eigenvalue: f64, distance: f64 },

    #[error("eigenvalue {0} of H2 is not above b_eps")]
    Separation(f64),

    #[error("singular block or Schur complement (reciprocal condition {0:e})")]
    SingularSchur(f64),

    #[error("eigensolver did not converge")]
    Eigen,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
