use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Dimension,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown grade label `{0}`")]
    UnknownGrade(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("value {value} at {location} is outside [0, 1]")]
    OutOfRange { value: f64, location: String },

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("unknown symptom `{0}`")]
    UnknownSymptom(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("death `{death}` has zero likelihood under every cause")]
    UndefinedDeath { death: String },

    #[error("no deaths could be assigned to any cause")]
    NoUsableDeaths,

    #[error("enumeration needs {size} assignments, limit is {limit}")]
    TooLarge { size: f64, limit: f64 },

    #[error("{0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Dimension(_) => ErrorKind::Dimension,
            Error::UndefinedDeath { .. }
            | Error::NoUsableDeaths
            | Error::TooLarge { .. }
            | Error::Numeric(_) => ErrorKind::Numeric,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
