use std::fmt;

/// Errors surfaced by parsing, estimation, and the oracles.
///
/// `Input` covers malformed files, unknown labels, and invalid parameter
/// combinations. `Resource` covers configured hard caps (truncation search
/// overflow, oracle state-space limits, cooperative deadlines).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    Input(String),
    Resource(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Input(msg) => write!(f, "input error: {msg}"),
            Error::Resource(msg) => write!(f, "resource limit: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Process exit code used by the command-line interface.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) => 2,
            Error::Resource(_) => 3,
        }
    }
}
