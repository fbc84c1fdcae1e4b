use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: corrupt data: {reason}", location(.path, *.line))]
    Corrupt {
        path: PathBuf,
        line: Option<usize>,
        reason: String,
    },
}

fn location(path: &Path, line: Option<usize>) -> String {
    match line {
        Some(l) => format!("{}:{l}", path.display()),
        None => path.display().to_string(),
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Corrupt { .. } => 4,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Maps a core error raised while reading `path`.
    pub fn data(path: &Path, err: momad_core::Error) -> CliError {
        match err {
            momad_core::Error::CorruptLog { line, reason } => CliError::Corrupt {
                path: path.to_path_buf(),
                line: Some(line),
                reason,
            },
            other => CliError::Corrupt {
                path: path.to_path_buf(),
                line: None,
                reason: other.to_string(),
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
