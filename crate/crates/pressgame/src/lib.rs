//! Command-line driver for `pressgame-core`: scenario files, a thread-pool
//! executor and CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod scenario;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use scenario::Scenario;
