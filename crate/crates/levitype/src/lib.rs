//! Command-line front end for `levitype-core`: expression and file
//! parsing, command dispatch and report rendering.

pub mod commands;
pub mod error;
pub mod expr;
pub mod input;
pub mod tree;

pub use commands::{run_command, Command, Outcome, ProblemSpec, StrategySpec, StructureSource};
pub use error::CliError;
