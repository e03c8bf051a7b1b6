//! Command-line front end for the `topdc` rate calculator.

pub mod commands;
pub mod config;
pub mod plot;
