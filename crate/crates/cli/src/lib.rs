//! Command-line front end: input files, run configuration and reports.

pub mod input;
pub mod run;

pub use input::{parse_input, parse_str, serialize, Input, InputError};
pub use run::{parse_rational, run, Command, Format, Outcome, RunConfig};
