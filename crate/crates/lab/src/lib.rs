//! Datasets, checkpoints, result files, experiments and the command line
//! around `inpaint-core`.

pub mod checkpoint;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod files;
pub mod logging;
pub mod plot;
pub mod results;

pub use cli::run;
pub use error::{LabError, Result};
