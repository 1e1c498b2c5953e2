use thiserror::Error;

/// Errors produced by the donor-spin library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Species or run parameters outside their physical domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The eigensolver or a root refinement failed to converge.
    #[error("numerical failure at B0 = {field} T: {reason}")]
    Numeric { field: f64, reason: String },

    /// A transition selector did not resolve to a pair of states.
    #[error("unknown transition: {0}")]
    UnknownTransition(String),

    /// A request would allocate an unreasonable amount of work.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A configuration document could not be parsed.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
