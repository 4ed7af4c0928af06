//! Configuration-driven runner for the stationary-recursion analyses.

pub mod app;
pub mod config;
pub mod report;
pub mod table;

pub use app::{exit, load, run, run_batch, CliError, Command, Overrides};
pub use config::{build, Model, ModelConfig, ModelKind};
pub use report::RunReport;
