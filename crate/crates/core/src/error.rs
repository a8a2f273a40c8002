use thiserror::Error;

/// Errors raised by model construction, estimation and fusion.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected:?}, got {actual:?}")]
    Dimension {
        context: String,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("input error: {0}")]
    Input(String),

    /// The innovation covariance could not be factored.
    #[error("estimator failure for sensor {sensor}: innovation covariance not positive definite (condition estimate {condition:.3e})")]
    Estimator { sensor: usize, condition: f64 },

    #[error("fusion failure: covariance matrix singular after regularization (condition estimate {condition:.3e})")]
    Fusion { condition: f64 },

    /// Wraps a failure with the time step at which it happened.
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn dim(
        context: impl Into<String>,
        expected: (usize, usize),
        actual: (usize, usize),
    ) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            actual,
        }
    }

    pub fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerical recursions rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Estimator { .. } | Error::Fusion { .. } => true,
            Error::AtStep { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
