use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument fell outside its admissible domain.
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("score set is empty; the expectation over individuals is undefined")]
    EmptyScoreSet,

    #[error("collection of distributions is empty")]
    EmptyCollection,

    #[error("invalid counterfactual distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A training portion is missing one of the four (treatment, outcome) cells.
    #[error("{context}: no rows with treatment={treatment}, outcome={outcome}")]
    Occupancy {
        context: String,
        treatment: u8,
        outcome: u8,
    },

    /// Malformed input data, with a human readable location.
    #[error("{location}: {message}")]
    Data { location: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn data(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Data {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the content of user supplied data or arguments,
    /// as opposed to environment failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
