use std::fmt;
use std::io;
use std::path::PathBuf;

/// Everything that can stop a run.
#[derive(Debug)]
pub enum LabError {
    /// A configuration field is missing or out of range.
    Validation { field: &'static str, message: String },
    /// A config, matrix or channel file could not be parsed.
    Parse { path: Option<PathBuf>, message: String },
    Io { path: Option<PathBuf>, source: io::Error },
    Csv(csv::Error),
    Core(sidecode_core::Error),
}

impl LabError {
    pub fn validation(field: &'static str, message: impl Into<String>) -> Self {
        LabError::Validation { field, message: message.into() }
    }

    pub fn parse(path: Option<PathBuf>, message: impl Into<String>) -> Self {
        LabError::Parse { path, message: message.into() }
    }

    /// 1 for bad input, 2 for failures during the run (caps included).
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation { .. } | LabError::Parse { .. } => 1,
            LabError::Io { .. } | LabError::Csv(_) | LabError::Core(_) => 2,
        }
    }

    pub fn is_cap(&self) -> bool {
        matches!(self, LabError::Core(e) if e.is_cap())
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Validation { field, message } => write!(f, "invalid config field `{field}`: {message}"),
            LabError::Parse { path: Some(p), message } => write!(f, "{}: {message}", p.display()),
            LabError::Parse { path: None, message } => write!(f, "parse error: {message}"),
            LabError::Io { path: Some(p), source } => write!(f, "{}: {source}", p.display()),
            LabError::Io { path: None, source } => write!(f, "{source}"),
            LabError::Csv(e) => write!(f, "csv: {e}"),
            LabError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LabError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            LabError::Io { source, .. } => Some(source),
            LabError::Csv(e) => Some(e),
            LabError::Core(e) => Some(e),
            _ => None,
        }
    }
}

impl From<sidecode_core::Error> for LabError {
    fn from(e: sidecode_core::Error) -> Self {
        LabError::Core(e)
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Csv(e)
    }
}

impl From<io::Error> for LabError {
    fn from(e: io::Error) -> Self {
        LabError::Io { path: None, source: e }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
