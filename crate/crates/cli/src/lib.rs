pub mod commands;
pub mod error;
pub mod json;
pub mod problem;
pub mod reproductions;

pub use commands::{Body, Report, Settings};
pub use error::CliError;
