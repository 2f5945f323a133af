use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn location(path: &std::path::Path, line: &Option<usize>) -> String {
    match line {
        Some(l) => format!("{}:{l}", path.display()),
        None => path.display().to_string(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: parse error: {msg}", location(.path, &Some(*.line)))]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{}: invalid configuration: {msg}", location(.path, .line))]
    Validation { path: PathBuf, line: Option<usize>, msg: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: blockspec_core::Error,
    },
    #[error("malformed report: {0}")]
    Report(String),
    #[error("verification failed: {}", .failed.join(", "))]
    Verification { failed: Vec<String> },
}

impl CliError {
    /// 0 success, 1 verification failure, 2 usage or configuration error,
    /// 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification { .. } => 1,
            CliError::Numerical { .. } => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for blockspec_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Numerical { context: what(), source })
    }
}
