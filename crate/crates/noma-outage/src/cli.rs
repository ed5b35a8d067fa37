//! Command-line layer: config loading, sweeps, figure presets, validation.

pub mod config;
pub mod figures;
pub mod svg;
pub mod sweep;
pub mod validate;

use thiserror::Error;

/// Errors surfaced to the CLI user.  `Config` covers anything wrong with the
/// requested computation (bad flags, bad config file, unevaluable setup);
/// `Io` covers filesystem trouble.  Both map to exit code 1; a validation
/// that runs but fails its checks exits 2 instead.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}
