//! Error types shared across the engine.

use thiserror::Error;

/// Violations found while validating a groupoid description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupoidError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("arrow `{arrow}` refers to unknown unit `{unit}`")]
    UnknownUnit { arrow: String, unit: String },
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("non-composable pair ({left}, {right}): source of `{left}` differs from range of `{right}`")]
    NonComposable { left: String, right: String },
    #[error("product ({left}, {right}) = `{result}` has wrong source or range")]
    BadProduct { left: String, right: String, result: String },
    #[error("conflicting products for ({left}, {right})")]
    ConflictingProduct { left: String, right: String },
    #[error("missing product for composable pair ({left}, {right})")]
    MissingProduct { left: String, right: String },
    #[error("associativity fails on ({a}, {b}, {c})")]
    Associativity { a: String, b: String, c: String },
    #[error("missing inverse for `{0}`")]
    MissingInverse(String),
    #[error("unit arrow `{0}` is not neutral")]
    NotNeutral(String),
}

/// Top-level engine error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid groupoid: {0}")]
    Groupoid(#[from] GroupoidError),
    #[error("invalid module: {0}")]
    Module(String),
    #[error("invalid algebra: {0}")]
    Algebra(String),
    #[error("invalid G-space: {0}")]
    Space(String),
    #[error("form of degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("dimension guard exceeded: {dim} > {limit}")]
    Guard { dim: usize, limit: usize },
    #[error("covariance fails for arrow `{arrow}` on basis vector {index}")]
    Covariance { arrow: String, index: usize },
    #[error("not a homomorphism on basis pair ({0}, {1})")]
    NotHomomorphism(usize, usize),
    #[error("no quasifree certificate for {0}")]
    NoCertificate(String),
    #[error("curvature ideal is not nilpotent of order {level}")]
    Nilpotency { level: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
