//! Front end for `stefan-core`: TOML configs, the `solve`, `field`,
//! `verify` and `sweep` commands, and their CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;
