use alloc::string::String;

/// Errors raised by object construction, distances, fitting and projections.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("incompatible objects: {0}")]
    Incompatible(String),

    #[error("invalid object: {0}")]
    InvalidObject(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("singular covariance (condition number {condition:.3e})")]
    SingularCovariance { condition: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("subject {subject}: {source}")]
    Subject {
        subject: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_replicate(self, replicate: usize) -> Self {
        Error::Replicate {
            replicate,
            source: alloc::boxed::Box::new(self),
        }
    }

    pub(crate) fn in_subject(self, subject: usize) -> Self {
        Error::Subject {
            subject,
            source: alloc::boxed::Box::new(self),
        }
    }
}
