use std::fmt;
use std::path::Path;

/// A command failure, classified by the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, configuration or inputs outside an operation's domain.
    Invalid(String),
    /// Missing or unreadable files and malformed file contents.
    Io(String),
    /// A solver iterate stopped being finite.
    Numerical(String),
}

impl Failure {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Failure::Invalid(msg.into())
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Failure::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(msg) | Failure::Io(msg) | Failure::Numerical(msg) => f.write_str(msg),
        }
    }
}

impl From<lrr_core::Error> for Failure {
    fn from(err: lrr_core::Error) -> Self {
        use lrr_core::Error;
        let msg = err.to_string();
        match err {
            Error::Domain(_) | Error::Precondition(_) => Failure::Invalid(msg),
            Error::Parse { .. } | Error::Io { .. } => Failure::Io(msg),
            Error::Numerical { .. } => Failure::Numerical(msg),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;
