use thiserror::Error;

use crate::jets::JetError;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("invalid germ: {0}")]
    InvalidGerm(String),
    #[error("malformed surface file: {0}")]
    MalformedFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("degenerate hypersurface: {0}")]
    Degenerate(String),
    #[error("not strongly C-linearly convex: {0}")]
    NotSclc(String),
    #[error("singular: {0}")]
    Singular(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("insufficient jet order: {0}")]
    InsufficientOrder(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Usage,
    Consistency,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Syntax { .. }
            | Error::UnknownVariable { .. }
            | Error::MalformedFile(_)
            | Error::Io(_)
            | Error::Config(_) => ErrorKind::Usage,
            Error::Consistency(_) => ErrorKind::Consistency,
            Error::Module { source, .. } => source.kind(),
            _ => ErrorKind::Domain,
        }
    }

    /// Tags the error with the module that raised it.
    pub fn in_module(self, module: &'static str) -> Error {
        match self {
            Error::Module { .. } => self,
            other => Error::Module { module, source: Box::new(other) },
        }
    }

    /// The error with module tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Module { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
