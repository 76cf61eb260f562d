//! Error classification into process exit codes.

use std::fmt;
use std::path::Path;

pub const OK: u8 = 0;
pub const CONFIG: u8 = 1;
pub const IO: u8 = 2;
pub const INTERNAL: u8 = 3;

/// A problem with the user's configuration or arguments.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn io_error(path: &Path, source: std::io::Error) -> anyhow::Error {
    lqas_core::Error::Io {
        path: path.to_path_buf(),
        source,
    }
    .into()
}

pub fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

pub fn create_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path).map_err(|e| io_error(path, e))
}

pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return CONFIG;
        }
        if cause.is::<std::io::Error>() {
            return IO;
        }
        if let Some(e) = cause.downcast_ref::<lqas_core::Error>() {
            use lqas_core::Error as E;
            return match e {
                E::Io { .. } => IO,
                E::Numeric(_) | E::Json(_) => INTERNAL,
                E::Config(_)
                | E::Dimension(_)
                | E::UndefinedMetric(_)
                | E::Scaling { .. }
                | E::Parse { .. }
                | E::InvalidAnsatz(_) => CONFIG,
            };
        }
    }
    INTERNAL
}
