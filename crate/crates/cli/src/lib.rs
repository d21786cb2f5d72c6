//! Batch front-end for resolvent-lab: instance files, verification suites and
//! table/report output.

pub mod commands;
pub mod instance;
pub mod report;
pub mod suites;

pub use instance::{InstanceFile, Kind, Lab};
pub use report::{Check, Report};
pub use suites::{Suite, Tamper, VerifyOptions};
