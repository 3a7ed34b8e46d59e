use crate::symbolic::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("form degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },

    #[error("contraction needs a form of degree at least {needed}, got {got}")]
    DegreeUnderflow { needed: usize, got: usize },

    #[error("section does not supply coordinate `{0}`")]
    MissingSectionComponent(String),

    #[error("point has no scalar momentum `p` (it lies in the restricted space)")]
    MissingScalarMomentum,

    #[error("point already carries a scalar momentum `p`")]
    ScalarMomentumPresent,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("the Lagrangian must not depend on momentum coordinate `{0}`")]
    LagrangianUsesMomenta(String),

    #[error("Hamiltonian expression may only use x, y and momentum coordinates, found `{0}`")]
    HamiltonianUsesVelocity(String),

    #[error("singular Hessian (det = {det:e}) at Newton iterate {iteration}")]
    SingularHessian { det: f64, iteration: usize },

    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Lagrangian: unified constraint algorithm beyond W1 not implemented")]
    SingularLagrangian,

    #[error("inconsistent linear system: residual {residual:e} outside the range of the Hessian")]
    InconsistentSystem { residual: f64 },

    #[error("Hamilton-De Donder-Weyl relation violated: {relation} off by {deviation:e}")]
    HdwRelationViolated { relation: String, deviation: f64 },

    #[error("singular Jacobian in Newton solve (pivot {pivot:e} at row {row})")]
    SingularJacobian { row: usize, pivot: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Error {
        Error::Csv(e.to_string())
    }
}
