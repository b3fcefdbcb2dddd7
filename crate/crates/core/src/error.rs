use thiserror::Error;

use crate::graph::Edge;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("window {window} is outside the schedule ({windows} complete windows)")]
    WindowOutOfRange { window: usize, windows: usize },

    #[error("node {node} is out of range for {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not column stochastic: {0}")]
    NotColumnStochastic(String),

    #[error("delay spec references edge {0} which is not in the union edge set")]
    UnknownDelayEdge(Edge),

    #[error("edge {0} has no delay assigned")]
    MissingDelay(Edge),

    #[error("delay for edge {0} is given more than once")]
    DuplicateDelay(Edge),

    #[error("Omega = {omega} is below 3; the convergence constants are undefined")]
    OmegaTooSmall { omega: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("initial point of node {node} lies outside the feasible set")]
    InfeasibleStart { node: usize },

    #[error("push-sum weight of compute node {node} is {weight} at step {step}")]
    NonPositiveWeight { node: usize, weight: f64, step: usize },

    #[error("non-finite subgradient at node {node}, step {step}")]
    NonFiniteSubgradient { node: usize, step: usize },

    #[error("step size requested at t = 0; schedules start at t = 1")]
    StepAtZero,

    #[error("trajectory shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("missing diagnostics: {0}")]
    MissingDiagnostics(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the error stems from bad input rather than a fault while running.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NonPositiveWeight { .. } | Error::NonFiniteSubgradient { .. } | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
