//! Command-line front end for the quenched free-energy engine.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
