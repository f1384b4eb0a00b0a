//! Command failures and their exit codes.

use std::path::PathBuf;

use serde::Serialize;

/// Exit status for configuration and usage problems.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for unreadable or invalid input data.
pub const EXIT_DATA: i32 = 2;
/// Exit status for numerical failures during computation.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Input { path: PathBuf, line: u64, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] mtdpp::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use mtdpp::Error as E;
        match self {
            Self::Usage(_) | Self::Config { .. } => EXIT_USAGE,
            Self::Input { .. } | Self::Io { .. } => EXIT_DATA,
            Self::Core(e) => match e {
                E::Contract(_) => EXIT_USAGE,
                E::Numerical(_) | E::NotStationary(_) => EXIT_NUMERIC,
                E::Domain(_) | E::Data(_) | E::InsufficientEvents { .. } | E::Io(_) | E::Csv(_) | E::Json(_) => {
                    EXIT_DATA
                }
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_DATA => "data",
            _ => "numeric",
        }
    }

    /// One-line JSON description for stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        let r = Record { error: self.kind(), exit_code: self.exit_code(), message: self.to_string() };
        serde_json::to_string(&r).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", r.error))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let code = |e: mtdpp::Error| CliError::from(e).exit_code();
        assert_eq!(code(mtdpp::Error::Contract("k".into())), EXIT_USAGE);
        assert_eq!(code(mtdpp::Error::Data("x".into())), EXIT_DATA);
        assert_eq!(code(mtdpp::Error::Numerical("nan".into())), EXIT_NUMERIC);
        assert_eq!(code(mtdpp::Error::NotStationary("seasonal".into())), EXIT_NUMERIC);
    }

    #[test]
    fn record_is_one_json_line() {
        let e = CliError::Input { path: "p.csv".into(), line: 4, message: "duplicate time".into() };
        let v: serde_json::Value = serde_json::from_str(&e.record()).unwrap();
        assert_eq!(v["error"], "data");
        assert_eq!(v["exit_code"], 2);
        assert_eq!(v["message"], "p.csv:4: duplicate time");
        assert!(!e.record().contains('\n'));
    }
}
