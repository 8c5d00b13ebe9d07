use thiserror::Error;

use crate::model::ConfigViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {}", join_violations(.0))]
    InvalidConfig(Vec<ConfigViolation>),

    #[error("invalid trial plan: {0}")]
    InvalidPlan(String),

    #[error("pilot symbol must have unit modulus (got |p| = {0})")]
    NonUnitPilot(f64),

    #[error("parameter vector has a non-finite entry at m = {0}")]
    NonFiniteParameter(usize),

    #[error("expected {nodes} parameter vectors of length {symbols}")]
    ParameterShape { nodes: usize, symbols: usize },

    #[error("expected {expected} node realizations, got {got}")]
    NodeCount { expected: usize, got: usize },

    #[error("phase of a zero sample is undefined")]
    UndefinedPhase,

    #[error("node index {0} out of range 1..={1}")]
    NodeOutOfRange(usize, usize),

    #[error("trial {trial} produced a non-finite phase deviation")]
    NonFiniteTrial { trial: u64 },

    #[error("empirical CDF needs at least one sample")]
    EmptySamples,

    #[error("standard deviation must be positive (got {0})")]
    NonPositiveSigma(f64),
}

fn join_violations(v: &[ConfigViolation]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}
