//! Configuration, file formats, experiment runners and command line for
//! the coupled channel solver.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;
pub mod snapshot;
