//! Command-line front end: parsing, execution and report formatting.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_args, RunConfig};
pub use run::execute;
