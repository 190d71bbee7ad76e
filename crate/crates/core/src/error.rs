//! Error types shared across the engine.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by corpus, gazetteer, fuzzy, index, and retrieval code.
#[derive(Debug, Error)]
pub enum Error {
    /// An identifier was empty or otherwise unusable.
    #[error("invalid identifier: {0}")]
    Identifier(String),

    /// Input bytes were not valid UTF-8.
    #[error("invalid encoding in {0}")]
    Encoding(String),

    /// The corpus has been sealed; no further ingestion is allowed.
    #[error("corpus is sealed; ingestion is not allowed")]
    Sealed,

    /// Gazetteer validation failed; every violating row is listed.
    #[error("gazetteer validation failed:\n{}", .violations.join("\n"))]
    GazetteerInvalid { violations: Vec<String> },

    /// A place id was not found in the gazetteer.
    #[error("unknown place id: {0}")]
    UnknownPlace(String),

    /// A document id was not found in the corpus.
    #[error("unknown document id: {0}")]
    UnknownDocument(String),

    /// Alpha for an alpha-cut must lie in (0, 1].
    #[error("alpha out of range (0, 1]: {0}")]
    AlphaRange(f64),

    /// Fusion over an empty surface list.
    #[error("cannot fuse an empty list of surfaces")]
    EmptyFusion,

    /// Weighted fusion with weights that are negative or sum to zero.
    #[error("invalid fusion weights: {0}")]
    FusionWeights(String),

    /// Defuzzification over an all-zero surface.
    #[error("no location: possibility surface is zero everywhere")]
    NoLocation,

    /// A rule base input variable was not supplied to inference.
    #[error("missing inference input variable: {0}")]
    MissingInput(String),

    /// No rule produced a non-zero activation; relevance is undefined.
    #[error("no rule fired; relevance is undefined")]
    NoRuleFired,

    /// A rule base referenced labels or variables that do not exist,
    /// or an input partition does not cover [0, 1].
    #[error("invalid rule base: {0}")]
    RuleBase(String),

    /// Corpus statistics and term counts disagree.
    #[error("inconsistent statistics: {0}")]
    Inconsistency(String),

    /// Stored data failed an integrity check.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Configuration could not be read or was malformed.
    #[error("config error: {0}")]
    Config(String),

    /// A query string could not be turned into a plan.
    #[error("query error: {0}")]
    Query(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
