use thiserror::Error;

/// Errors raised across the simulation, estimation and PDE layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbsdeError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: String,
        value: f64,
        constraint: String,
    },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point (t={t}, x={x}) lies outside the nondegenerate region; the weighted representation does not apply")]
    OutsideGamma0 { t: f64, x: f64 },

    #[error("a value provider is required: {0}")]
    MissingProvider(&'static str),

    #[error("model `{0}` has no payoff derivative")]
    MissingPayoffDerivative(String),

    #[error("{invalid} of {total} paths produced non-finite values")]
    TooManyInvalidPaths { invalid: usize, total: usize },

    #[error("every path was floored ({0} paths)")]
    AllPathsFloored(usize),

    #[error("CFL violation: dt = {dt} exceeds the admissible {max_dt}")]
    Cfl { dt: f64, max_dt: f64 },

    #[error("non-finite value in finite-difference solve at level {level}, node {node}")]
    NonFinitePde { level: usize, node: usize },
}

pub type Result<T> = std::result::Result<T, FbsdeError>;

pub(crate) fn invalid(name: &str, value: f64, constraint: impl Into<String>) -> FbsdeError {
    FbsdeError::InvalidParameter {
        name: name.to_string(),
        value,
        constraint: constraint.into(),
    }
}
