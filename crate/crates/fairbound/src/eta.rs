//! Parsing of the `--eta` choice and selection of a default estimator.

use std::fmt;
use std::str::FromStr;

use fairbound_core::{ColumnKind, Dataset, EtaEstimator};

use crate::error::{Error, Result};

/// Default pseudo-count of the group-frequency estimator. Zero keeps the
/// empirical frequencies, which are exact for the sample.
pub const DEFAULT_SMOOTHING: f64 = 0.0;
/// Default L2 strength of the logistic group model.
pub const DEFAULT_REGULARIZATION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EtaChoice {
    Frequency,
    Model,
    /// Values from the named input column.
    Column(String),
}

impl FromStr for EtaChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "freq" | "frequency" => Ok(EtaChoice::Frequency),
            "model" => Ok(EtaChoice::Model),
            _ => match s.strip_prefix("column:") {
                Some(name) if !name.is_empty() => Ok(EtaChoice::Column(name.to_string())),
                _ => Err(format!("expected freq, model or column:NAME, got '{s}'")),
            },
        }
    }
}

impl fmt::Display for EtaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaChoice::Frequency => f.write_str("freq"),
            EtaChoice::Model => f.write_str("model"),
            EtaChoice::Column(c) => write!(f, "column:{c}"),
        }
    }
}

/// Group frequencies when every feature is discrete, the model otherwise.
pub fn default_choice(data: &Dataset) -> EtaChoice {
    if data.column_kinds().iter().all(|k| *k == ColumnKind::Discrete) {
        EtaChoice::Frequency
    } else {
        EtaChoice::Model
    }
}

/// Fills in eta estimates. `column` must hold the values when the choice is
/// a column.
pub fn apply(data: &Dataset, choice: &EtaChoice, column: Option<&[f64]>, clip: f64) -> Result<Dataset> {
    let est = match choice {
        EtaChoice::Frequency => {
            if let Some(j) = data.column_kinds().iter().position(|k| *k == ColumnKind::Continuous) {
                return Err(Error::Schema(format!(
                    "feature '{}' is continuous; group frequencies need discrete features, use --eta model",
                    data.feature_names()[j]
                )));
            }
            EtaEstimator::group_frequency(DEFAULT_SMOOTHING)
        }
        EtaChoice::Model => EtaEstimator::model(DEFAULT_REGULARIZATION),
        EtaChoice::Column(name) => {
            let values = column.ok_or_else(|| Error::Schema(format!("no eta values loaded from column '{name}'")))?;
            EtaEstimator::supplied(values.to_vec())
        }
    };
    Ok(data.estimate_eta(&est.with_clip(clip))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_choices() {
        assert_eq!("freq".parse::<EtaChoice>().unwrap(), EtaChoice::Frequency);
        assert_eq!("column:p_male".parse::<EtaChoice>().unwrap(), EtaChoice::Column("p_male".into()));
        assert!("column:".parse::<EtaChoice>().is_err());
        assert_eq!(EtaChoice::Column("x".into()).to_string(), "column:x");
    }

    #[test]
    fn default_depends_on_column_kinds() {
        let d = fairbound_core::synthetic::students();
        assert_eq!(default_choice(&d), EtaChoice::Frequency);
        let b = fairbound_core::synthetic::biased_family(&Default::default()).unwrap();
        assert_eq!(default_choice(&b), EtaChoice::Model);
        assert!(apply(&b, &EtaChoice::Frequency, None, 1e-4).is_err());
    }
}
