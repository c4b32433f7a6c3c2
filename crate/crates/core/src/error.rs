use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The height is below the range where the asymptotic formula is used.
    #[error("out of range: {what} = {value} is below the minimum {min}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
    },

    /// A requested tolerance could not be reached.
    #[error("precision failure: {context} (estimate {estimate}, error bound {error_bound})")]
    Precision {
        context: String,
        estimate: f64,
        error_bound: f64,
    },

    /// A cache or table failed its consistency checks.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// The ladder constants do not admit a solution.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// An iterate or argument left the range where the ladder is defined.
    #[error("range error: {0}")]
    Range(String),

    /// The mean-value scan found no admissible point.
    #[error("existence failure: no sign change of g on ({from}, {to}); g ranged over [{g_min}, {g_max}]")]
    Existence {
        from: f64,
        to: f64,
        g_min: f64,
        g_max: f64,
    },

    /// Every retry of the alpha construction hit a near-zero of Z.
    #[error("degenerate configuration after {retries} retries: {reason}")]
    Degenerate { retries: usize, reason: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precision(context: impl Into<String>, estimate: f64, error_bound: f64) -> Self {
        Error::Precision {
            context: context.into(),
            estimate,
            error_bound,
        }
    }
}
