use thiserror::Error;

/// Errors produced by walklab computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("invalid group specification: {0}")]
    InvalidGroup(String),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("element does not belong to the group: {0}")]
    NotInGroup(String),

    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("size cap of {cap} elements exceeded{}", reached_suffix(*.reached))]
    CapExceeded { cap: usize, reached: Option<usize> },

    #[error("no return to the identity within {0} steps")]
    NoReturn(usize),

    #[error("coset label conflict at {element}: expected {expected}, found {found}")]
    LabelConflict {
        element: String,
        expected: usize,
        found: usize,
    },

    #[error("union of S^-k S^k did not stabilize by k = {k_max} ({} elements so far)", partial.len())]
    NoStabilization {
        k_max: usize,
        partial: Vec<crate::group::GroupElem>,
    },

    #[error("not irreducible: {0}")]
    Reducible(String),

    #[error("operation requires {0}")]
    Unsupported(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("did not converge: {0}")]
    NoConvergence(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("missing value at {0}")]
    MissingValue(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn reached_suffix(reached: Option<usize>) -> String {
    match reached {
        Some(n) => format!(" after reaching n = {n}"),
        None => String::new(),
    }
}

pub type Result<T, E = WalkError> = std::result::Result<T, E>;
