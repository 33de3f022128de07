//! File formats, configuration and batch drivers behind the `ctxmeasure`
//! command-line tool. The metrics themselves live in `ctxmeasure-core`.

pub mod colormap;
pub mod config;
mod error;
pub mod io;
pub mod manifest;
pub mod report;
pub mod runner;
pub mod selftest;

pub use error::{CliError, Result};
