//! Fairness-aware linear classification.
//!
//! Demographic parity is measured by the risk difference (RD). The extreme
//! classifiers of a dataset bound every RD it can produce. Calibration
//! transforms turn a budget on the true RD into convex surrogate constraints,
//! which an augmented-Lagrangian solver then enforces on a linear classifier.
//!
//! Everything here is pure computation over in-memory values and builds
//! without `std` (an allocator is required). File formats, reports and the
//! command line live in the companion `fairbound` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod fairness;
pub mod math;
pub mod optim;
pub mod solver;
pub mod surrogate;
pub mod synthetic;

pub use dataset::{ColumnKind, Dataset, EtaEstimator, EtaMethod, Group, SplitPlan, Stratification};
pub use error::{Error, Result};
pub use fairness::{BoundsReport, CriterionReport, Extremes, FairnessBudget, Notion, RowWeights};
pub use solver::{Init, LinearModel, SolverConfig, TrainOutcome, TrainStatus};
pub use surrogate::{PsiTransform, Surrogate, SurrogateKind};
