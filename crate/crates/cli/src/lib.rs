//! Command-line front end for the quasicontinuum solvers.

pub mod commands;
pub mod config;
pub mod output;
