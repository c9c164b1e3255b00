//! File formats, parallel drivers and the `gnlfr` command-line tool built on
//! [`gnlfr_core`].

pub mod binned;
pub mod cli;
pub mod config;
pub mod error;
pub mod fixture;
pub mod parallel;
pub mod workflow;

pub use error::{AppError, AppResult};
