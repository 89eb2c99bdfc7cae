//! File driver, reports and command-line front end for the `mltt_core` kernel.

pub mod driver;
pub mod report;

pub use driver::{check_files, check_source, Options, Report};
pub use mltt_core::value::EvalMode;
