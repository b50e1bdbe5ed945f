use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two values built for different levels (or different primes) were combined.
    #[error("context mismatch: {0}")]
    Context(String),
    /// An argument is outside the range an operation is defined on.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A group element or point lies outside the domain of a map.
    #[error("domain error: {0}")]
    Domain(String),
    /// An enumeration or dense computation would exceed its configured cap.
    #[error("resource limit: {what} needs a cap of at least {required} (configured {cap})")]
    Resource {
        what: String,
        required: u64,
        cap: u64,
    },
    /// `index` was called on a pair that is not nested.
    #[error("containment error: {0}")]
    Containment(String),
    /// A computed object failed a structural claim the caller relies on.
    #[error("structural failure: {0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, Error>;
