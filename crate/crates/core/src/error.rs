use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid hotspot threshold {0}: must be at least 1")]
    InvalidThreshold(u32),
    #[error("week {week} needs {needed} preceding weeks of history, only {available} available")]
    InsufficientHistory {
        week: usize,
        needed: usize,
        available: usize,
    },
    #[error("no records left after spatial filtering")]
    EmptyAfterFiltering,
    #[error("no commute tuples could be mapped to subzones")]
    EmptyAfterMapping,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("subzone {0} has no planning area")]
    MissingPlanningArea(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown region id {0}")]
    UnknownRegion(String),
    #[error("region labels of the two networks differ")]
    LabelMismatch,
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }
}

/// Returns a [`Error::DimensionMismatch`] unless `found == expected`.
pub(crate) fn check_dims(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::dims(context, expected, found))
    }
}
