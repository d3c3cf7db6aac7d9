use std::path::PathBuf;

use exactlin_core::CoreError;
use thiserror::Error;

use crate::parse::ParseDiagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}", render(.0))]
    Parse(Vec<ParseDiagnostic>),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invalid(String),
}

fn render(diags: &[ParseDiagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
