//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants carry enough
//! structure for callers (and the CLI's single-line error output) to name the
//! offending record, line, index tuple, or dimension without re-parsing
//! message strings.

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A line of a JSONL file failed to parse or validate.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Two records share an id.
    #[error("duplicate id `{id}`")]
    DuplicateId { id: String },

    /// A record is structurally invalid (missing text/vector, empty token
    /// list, zero vector under the cosine metric, ...).
    #[error("record `{id}`: {msg}")]
    Record { id: String, msg: String },

    /// Vector length disagrees with the established dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A vector component is NaN or infinite.
    #[error("non-finite component in vector `{id}`")]
    NonFinite { id: String },

    /// Catch-all input validation failure with a human-readable reason.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Requested subset size exceeds the dataset.
    #[error("requested k = {k} exceeds dataset size n = {n}")]
    KTooLarge { k: usize, n: usize },

    /// An operation needs more points than were supplied.
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// Covariance has no direction of variance above tolerance.
    #[error("degenerate covariance: all eigenvalues below 1e-14")]
    DegenerateCovariance,

    /// Min-max scaling hit a coordinate with a single distinct value.
    #[error("constant coordinate {coord}: min-max scaling undefined")]
    ConstantCoordinate { coord: usize },

    /// Points fail the general-position check; the violating index tuple is
    /// listed.
    #[error("points not in general position: tuple {tuple:?} is affinely dependent")]
    GeneralPosition { tuple: Vec<usize> },

    /// A mesh operation was asked for an unsupported ambient dimension.
    #[error("unsupported dimension {d}: triangulation is implemented for d in {{1, 2}}")]
    UnsupportedDim { d: usize },

    /// Mesh-level validation (coverage, circumcircles, degeneracy) failed.
    #[error("invalid mesh: {0}")]
    MeshInvalid(String),

    /// delta outside (0, 1).
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),

    /// Rejection sampling exhausted its attempt budget.
    #[error("rejection sampling exceeded {0} attempts; mixture mass lies almost entirely outside the domain")]
    RejectionCap(usize),

    /// A density specification is inconsistent.
    #[error("invalid density spec: {0}")]
    DensitySpec(String),

    /// Network parameter/input shapes disagree with the configuration.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The forward pass produced a non-finite value (diagnostic; should be
    /// unreachable with ε-normalization in place).
    #[error("non-finite value in forward pass")]
    NonFiniteForward,

    /// A batch operation received no data points.
    #[error("empty batch")]
    EmptyBatch,

    /// Every dissipativity sample had a vanishing gradient.
    #[error("gradient vanishes on sample set")]
    GradientVanishes,

    /// Interpolation query lies outside the mesh hull.
    #[error("query point lies outside the interpolation hull")]
    OutsideHull,

    /// Not enough mesh sizes for an order fit.
    #[error("order sweep needs at least 3 mesh sizes, got {0}")]
    TooFewSizes(usize),

    /// CLI / config-file level problem.
    #[error("config: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// CSV (de)serialization failure.
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// TOML deserialization failure.
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_name_the_offender() {
        let e = Error::Parse { line: 2, msg: "neither text nor vector present".into() };
        assert!(e.to_string().contains("line 2"));
        let e = Error::DimensionMismatch { expected: 4, got: 5 };
        assert_eq!(e.to_string(), "dimension mismatch: expected 4, got 5");
        let e = Error::GeneralPosition { tuple: vec![0, 1, 2] };
        assert!(e.to_string().contains("[0, 1, 2]"));
    }
}
