//! File formats, parallel table builds and the command-line pipeline around
//! [`eventdur_core`].

pub mod args;
pub mod case_file;
pub mod error;
pub mod forecast_file;
pub mod report;
pub mod run;
pub mod table_file;

pub use eventdur_core as core;
pub use error::{AppError, AppResult, ErrorKind};
