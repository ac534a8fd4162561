use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a type invariant (knot ordering, positivity, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A parameter lies outside the domain of the operation.
    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("derivative order {order} exceeds basis degree {degree}")]
    UnsupportedDerivativeOrder { order: usize, degree: usize },

    #[error("{count} control points cannot support a degree-{degree} basis (need at least {})", degree + 1)]
    InsufficientControlPoints { count: usize, degree: usize },

    #[error("degenerate geometry: jacobian determinant {det_j:e} at ({xi}, {eta})")]
    DegenerateGeometry { det_j: f64, xi: f64, eta: f64 },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("boundary conditions leave no free degrees of freedom")]
    OverConstrained,

    #[error("mass matrix is not positive definite")]
    IndefiniteMass,

    #[error("stiffness matrix is not positive definite (missing constraints?)")]
    IndefiniteStiffness,

    #[error("eigenvalue {index} = {value:e} is not safely positive (largest {max:e})")]
    NonPositiveEigenvalue { index: usize, value: f64, max: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e}, target {target:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
}
