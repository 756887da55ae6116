//! File formats, configuration and the `mulspace` command line on top of
//! [`mulspace_core`].
//!
//! * [`msgf`]: the binary grid-function container,
//! * [`config`]: defaults, the flat `key = value` config file and overrides,
//! * [`commands`]: one function per subcommand, returning a JSON report and
//!   its per-index table,
//! * [`cli`]: argument parsing, exit codes and rendering.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod msgf;

pub use crate::cli::run;
pub use crate::error::CliError;
