//! File formats, experiment drivers and the command-line front end for the
//! `htscatter-core` simulator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod drivers;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod scatter;

pub use config::{LoadedConfig, RunConfig};
pub use drivers::RunOptions;
pub use error::RunError;
