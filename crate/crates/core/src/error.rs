//! Error type shared by every module of the crate.

use alloc::string::String;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// Two inputs that must be row-aligned have different lengths.
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    /// A model and a dataset disagree on the number of features.
    #[error("feature dimension mismatch: model has {model}, data has {data}")]
    DimensionMismatch { model: usize, data: usize },

    /// Only one sensitive group occurs where both are required.
    #[error("both sensitive groups must occur at least once")]
    DegenerateGroup,

    #[error("dataset needs at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("label {value} at row {row} is not -1 or +1")]
    InvalidLabel { row: usize, value: i8 },

    /// A non-finite value was found in the feature matrix.
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },

    #[error("eta estimate {value} at row {row} is outside [0, 1]")]
    EtaOutOfRange { row: usize, value: f64 },

    #[error("mean eta {mean} differs from the group rate {p}")]
    EtaNotCalibrated { mean: f64, p: f64 },

    #[error("eta estimates are required but missing")]
    MissingEta,

    /// Group-frequency estimation was requested on a continuous column.
    #[error("group-frequency estimation needs discrete features; column `{0}` is continuous")]
    ContinuousFeature(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    /// The calibration transform of a surrogate pair is not invertible.
    #[error("calibration transform for the {0} surrogate is not invertible")]
    NonInvertible(&'static str),

    /// The line search could not find a finite objective value.
    #[error("step-size failure: objective became non-finite")]
    StepSizeFailure,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}
