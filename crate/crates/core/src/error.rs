use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("symbol index {index} is beyond the sequence horizon {horizon}")]
    Horizon { index: u64, horizon: u64 },

    #[error("inadmissible transition {from} -> {to} at index {index}")]
    Inadmissible { from: u8, to: u8, index: u64 },

    #[error("invalid {what}: {reason}")]
    Validation { what: &'static str, reason: String },

    #[error("incompatible: {0}")]
    Incompatible(String),
}

impl Error {
    pub(crate) fn validation(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            what,
            reason: reason.into(),
        }
    }

    /// Horizon violations are range errors; everything else is a validation
    /// problem with the inputs.
    pub fn is_range(&self) -> bool {
        matches!(self, Error::Horizon { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
