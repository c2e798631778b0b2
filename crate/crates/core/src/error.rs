use thiserror::Error;

use crate::ode::State;

pub type Result<T> = std::result::Result<T, SolverError>;

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("invalid problem definition: {0}")]
    InvalidSpec(String),

    #[error("dimension {d} outside the supported range: {reason}")]
    Domain { d: u32, reason: &'static str },

    #[error("non-finite state component at x = {x}")]
    InvalidState { x: f64 },

    #[error("step size underflow at x = {} (h = {h:e})", .last.r)]
    Stiffness { last: State, h: f64 },

    #[error("manifold initialization failed: {0}")]
    Initialization(String),

    #[error("no crossing bracket found after {attempts} doublings (last c = {c_last})")]
    BracketNotFound { attempts: usize, c_last: f64 },

    #[error("converged profile has {found} nodes, expected {expected}")]
    NodeMiscount { expected: usize, found: usize },

    #[error("profile not in the decayed regime: {0}")]
    NotDecayed(String),

    #[error("radius {r} outside profile range [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("fit domain error: {0}")]
    FitDomain(String),

    #[error("model not applicable: {0}")]
    ModelNotApplicable(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<SolverError>,
    },
}

impl SolverError {
    pub fn context(self, context: impl Into<String>) -> Self {
        SolverError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping any context wrappers.
    pub fn root(&self) -> &SolverError {
        match self {
            SolverError::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
