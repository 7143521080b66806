use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("graph has no spanning tree")]
    NotConnected,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid convex set: {0}")]
    InvalidSet(String),

    #[error("invalid inequality: {0}")]
    InvalidInequality(String),

    #[error("state of agent {agent} became non-finite")]
    NonFinite { agent: usize },

    #[error("state of agent {agent} diverged (norm {norm:e} exceeds {bound:e})")]
    Diverged { agent: usize, norm: f64, bound: f64 },

    #[error("consensus gain h = {h} is outside (0, {bound})")]
    StepSizeViolation { h: f64, bound: f64 },

    #[error("step size {value} at t = {t} is outside [0, 1]")]
    ScheduleViolation { t: f64, value: f64 },

    #[error("agent {agent} does not hold a linear inequality block")]
    WrongInequalityKind { agent: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("runtime assertion `{check}` failed at step {step}: lhs {lhs:e} > rhs {rhs:e}")]
    AssertionFailure {
        check: String,
        step: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error("malformed scenario at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
