use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {0} lies in the excluded set of the family")]
    ExcludedPoint(String),
    #[error("ball of radius {radius} around {center} leaves the grid")]
    BallOutsideGrid { center: String, radius: f64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("empty set: {0}")]
    EmptySet(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("assembled operator is not positive definite (curvature {0:e})")]
    Indefinite(f64),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn fmt_point<T: std::fmt::Debug>(x: &[T]) -> String {
    format!("{x:?}")
}
