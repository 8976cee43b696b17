use thiserror::Error;

use crate::state::Field;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid state: {field} = {value} at cell {cell}")]
    InvalidState { cell: usize, field: Field, value: f64 },

    #[error("field length mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("kinetic pressure {value} at cell {cell} is not positive; volume production is singular")]
    SingularClosure { cell: usize, value: f64 },

    #[error("time step is not finite and positive: {0}")]
    InvalidTimeStep(f64),

    #[error("simulation diverged at step {step} (t = {time}): {source}")]
    Diverged {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("root finder failed: {0}")]
    RootFinding(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
