//! File formats, dataset loaders, reports and budget sweeps around
//! [`fairbound_core`]. The `fairbound` binary is a thin layer over these
//! modules.

pub mod adult;
pub mod encoding;
pub mod error;
pub mod eta;
pub mod model_io;
pub mod report;
pub mod store;
pub mod sweep;

pub use error::{Error, Result};
