//! Command-line driver: configuration parsing, subcommands and output files.

pub mod commands;
pub mod config;
pub mod output;

use std::io;

use thiserror::Error;

pub use config::{parse_config, parse_config_str, ConfigError, Origin, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
    /// One diagnostic per failed check.
    #[error("{}", .0.join("\n"))]
    Check(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl From<wpcn_auction::Error> for CliError {
    fn from(e: wpcn_auction::Error) -> Self {
        match e {
            wpcn_auction::Error::Format { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

/// Turns `--key value` / `--key=value` tokens into override pairs.
pub fn parse_overrides(tokens: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    let mut it = tokens.iter();
    while let Some(tok) = it.next() {
        let Some(flag) = tok.strip_prefix("--") else {
            return Err(ConfigError {
                key: tok.clone(),
                origin: Origin::Flag,
                reason: "expected `--key value`".into(),
            });
        };
        if let Some((k, v)) = flag.split_once('=') {
            pairs.push((k.to_string(), v.to_string()));
        } else {
            let value = it.next().ok_or_else(|| ConfigError {
                key: flag.to_string(),
                origin: Origin::Flag,
                reason: "missing value".into(),
            })?;
            pairs.push((flag.to_string(), value.clone()));
        }
    }
    Ok(pairs)
}
