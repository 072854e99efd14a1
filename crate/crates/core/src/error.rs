use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ball too large: {requested} vertices exceeds budget of {budget}")]
    BudgetExceeded { requested: u128, budget: usize },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("symbols have different branching numbers ({0} vs {1})")]
    KappaMismatch(u32, u32),

    #[error("symbol has {available} coefficients but {required} are needed")]
    SymbolTooShort { available: usize, required: usize },

    #[error("tail bound {bound:e} exceeds tolerance {tolerance:e}")]
    InsufficientDecay { bound: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numeric certification failed: {0}")]
    Certification(String),

    #[error("cannot parse symbol spec near `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
