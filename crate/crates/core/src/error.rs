use thiserror::Error;

/// Errors raised by the stability-lab library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("content domain must contain at least one symbol")]
    EmptyDomain,
    #[error("duplicate symbol `{0}` in content domain")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` is not in the content domain")]
    UnknownSymbol(String),
    #[error("symbol index {index} out of range for domain of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("weight vector has length {got}, domain has {expected} symbols")]
    LengthMismatch { expected: usize, got: usize },
    #[error("weight {value} at index {index} is negative or not finite")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within 1e-9")]
    NotNormalized { sum: f64 },
    #[error("operands live on different content domains")]
    DomainMismatch,
    #[error("domain of size {size} exceeds the event-enumeration cap of {max}")]
    DomainTooLarge { size: usize, max: usize },
    #[error("list of models is empty")]
    EmptyList,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset has {size} items, at least {min} required")]
    DatasetTooSmall { size: usize, min: usize },
    #[error("dataset has {got} items, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("safe assignment is empty")]
    EmptySafeAssignment,
    #[error("protected content `{0}` appears twice in the safe assignment")]
    DuplicateContent(String),
    #[error("total variation between the safe models is 1; the no-free-lunch bound is vacuous")]
    DegenerateTv,
    #[error("no witness met the no-free-lunch bound (best margin {margin})")]
    WitnessNotFound { margin: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed json: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_param(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
