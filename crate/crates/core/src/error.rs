use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A quadrature, series or acceleration step did not reach its tolerance.
    #[error("numeric failure in {context}: residual estimate {residual:e} (value so far {value:e})")]
    NumericFailure { context: String, value: f64, residual: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("underflow: {0}")]
    Underflow(String),

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn numeric(context: impl Into<String>, value: f64, residual: f64) -> Self {
        Error::NumericFailure {
            context: context.into(),
            value,
            residual,
        }
    }
}

/// Carries the first error out of an infallible `Fn(f64) -> f64` callback
/// (quadrature integrands), which see NaN in its place.
pub(crate) struct ErrSlot(std::cell::RefCell<Option<Error>>);

impl ErrSlot {
    pub(crate) fn new() -> Self {
        ErrSlot(std::cell::RefCell::new(None))
    }

    pub(crate) fn catch(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.0.borrow_mut();
                if slot.is_none() {
                    *slot = Some(e);
                }
                f64::NAN
            }
        }
    }

    /// The captured error if any, otherwise `res`.
    pub(crate) fn finish<T>(self, res: Result<T>) -> Result<T> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => res,
        }
    }
}
