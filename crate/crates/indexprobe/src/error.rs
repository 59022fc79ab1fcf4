//! Error types shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A unit id appeared more than once within one scale.
    #[error("duplicate unit id `{id}` at scale `{scale}`")]
    DuplicateUnit { scale: String, id: String },

    /// A cell that should hold a real number did not parse.
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    /// A named column or schema requirement is missing or malformed.
    #[error("schema error: {0}")]
    Schema(String),

    /// Two objects that must share a scale do not.
    #[error("scale mismatch: expected `{expected}`, got `{got}`")]
    Scale { expected: String, got: String },

    /// A crosswalk source has no positive-overlap target to resolve to.
    #[error("source `{0}` has only zero-overlap links")]
    UnresolvableSource(String),

    /// A unit expects a parent value that does not exist.
    #[error("no parent score for unit `{0}`")]
    MissingParent(String),

    /// Too few usable values for the requested computation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An index spec was routed to an evaluator for a different method.
    #[error("spec `{spec}` has method `{method}`, not usable here")]
    Method { spec: String, method: String },

    /// An index spec violates its own structural invariants.
    #[error("invalid index spec: {0}")]
    Spec(String),

    /// A value fell outside its documented domain.
    #[error("domain error at `{unit}`: {reason}")]
    Domain { unit: String, reason: String },

    /// Operands that must cover the same unit set do not.
    #[error("unit sets differ: {0}")]
    UnitSet(String),

    /// A ranking with zero variance cannot be correlated.
    #[error("degenerate ranking: {0}")]
    DegenerateRanking(String),

    /// An impact record violates its invariants.
    #[error("bad record: {0}")]
    Record(String),

    /// A crosswalk references a unit the frame does not contain.
    #[error("unknown unit `{id}` at scale `{scale}`")]
    UnknownUnit { scale: String, id: String },

    /// An error from evaluating one named spec, tagged with its name.
    #[error("spec `{spec}`: {source}")]
    ForSpec {
        spec: String,
        #[source]
        source: Box<Error>,
    },

    /// File-level failure with the offending path.
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

impl Error {
    /// Tag an error with the spec name it arose under.
    pub fn for_spec(self, spec: &str) -> Error {
        Error::ForSpec {
            spec: spec.to_string(),
            source: Box::new(self),
        }
    }

    pub fn file(path: impl AsRef<std::path::Path>, message: impl std::fmt::Display) -> Error {
        Error::File {
            path: path.as_ref().display().to_string(),
            message: message.to_string(),
        }
    }
}
