//! Scenario files, reports and the command-line front end for `vckdv-core`.

pub mod cli;
pub mod report;
pub mod scenario;

pub use vckdv_core as core;
