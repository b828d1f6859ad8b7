use alloc::string::String;
use core::fmt;

/// Errors shared by every module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    DivisionByZero,
    /// Two scalars from different modes (or different q) were combined.
    ModeMismatch,
    /// Input text could not be parsed; `at` names the offending field or position.
    Parse { at: String, msg: String },
    /// A feasibility guard was exceeded.
    Guard { name: &'static str, value: i64, limit: i64 },
    Unsupported(String),
    /// A precondition on the mathematical input failed.
    Domain(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(at: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse { at: at.into(), msg: msg.into() }
    }
    pub(crate) fn guard(name: &'static str, value: i64, limit: i64) -> Self {
        Error::Guard { name, value, limit }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::ModeMismatch => write!(f, "scalar mode mismatch"),
            Error::Parse { at, msg } => write!(f, "parse error at {at}: {msg}"),
            Error::Guard { name, value, limit } => {
                write!(f, "feasibility guard `{name}` exceeded: {value} > {limit}")
            }
            Error::Unsupported(s) => write!(f, "unsupported: {s}"),
            Error::Domain(s) => write!(f, "{s}"),
        }
    }
}

impl core::error::Error for Error {}
