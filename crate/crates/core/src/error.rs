use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid problem definition or argument.
    #[error("invalid specification: {0}")]
    Spec(String),
    /// A gate or circuit violates an IR invariant.
    #[error("invalid circuit structure: {0}")]
    Structure(String),
    /// A configured size cap would be exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    /// A numeric quantity degenerated (e.g. an all-zero vector that cannot be normalized).
    #[error("numeric degeneracy: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
