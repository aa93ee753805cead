use alloc::string::String;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input error at entry {index}: {reason}")]
    InputAt { index: usize, reason: String },
    #[error("input error: {0}")]
    Input(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("positivity violated: unit {unit} has zero probability of {arm} exposure")]
    Positivity { unit: usize, arm: &'static str },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
