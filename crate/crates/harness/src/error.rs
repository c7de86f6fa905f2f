use std::fmt;

/// Failures of the harness, grouped by the exit code they map to.
#[derive(Debug)]
pub enum HarnessError {
    /// Bad command line (exit 2).
    Usage(String),
    /// Config text that does not parse (exit 3).
    Parse { line: usize, column: usize, message: String },
    /// A well-formed value that fails a check, with the path of the field
    /// (exit 3).
    Invalid { path: String, message: String },
    /// Failure while running (exit 4).
    Runtime(String),
}

impl HarnessError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn runtime(e: impl fmt::Display) -> Self {
        HarnessError::Runtime(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Parse { .. } | HarnessError::Invalid { .. } => 3,
            HarnessError::Runtime(_) => 4,
        }
    }

    /// Parse error at byte `offset` of `text`.
    pub(crate) fn at_offset(text: &str, offset: usize, message: impl Into<String>) -> Self {
        let before = &text[..offset.min(text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        HarnessError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Usage(m) => write!(f, "usage: {m}"),
            HarnessError::Parse { line, column, message } => {
                write!(f, "parse error at line {line}, column {column}: {message}")
            }
            HarnessError::Invalid { path, message } => write!(f, "invalid `{path}`: {message}"),
            HarnessError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

pub type HarnessResult<T> = Result<T, HarnessError>;
