use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),
    #[error("singular curve y^2 = x^3 + {a}x + {b}")]
    SingularCurve { a: i64, b: i64 },
    #[error("prime {p} is a prime of bad reduction")]
    BadPrime { p: u64 },
    #[error("root number unsupported for curve with additive reduction at {p}")]
    UnsupportedRootNumber { p: u64 },
    #[error("coefficient table too short: have {have}, need {need}")]
    NeedMoreCoefficients { have: usize, need: usize },
    #[error("missing zeros: {sign_changes} sign changes but argument principle counts {argument}")]
    MissingZeros { sign_changes: usize, argument: i64 },
    #[error("root number could not be determined numerically (residual ratio {ratio:e})")]
    UndeterminedSign { ratio: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
