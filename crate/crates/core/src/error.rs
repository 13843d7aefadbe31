//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Structural problem in a JSON schema: missing field, unknown kind,
    /// duplicate names, malformed document.
    #[error("schema error: {0}")]
    Schema(String),

    /// Numeric domain violation in a hyperparameter spec (lower >= upper,
    /// log scale with non-positive lower, default outside the range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid conditional declaration: unknown parent, nested or cyclic
    /// conditions, condition value outside the parent's domain.
    #[error("condition error: {0}")]
    Condition(String),

    /// A value was supplied for a hyperparameter that is inactive in the
    /// configuration (strict encoding only).
    #[error("inactive value: hyperparameter '{name}' is inactive but has a value")]
    InactiveValue { name: String },

    /// A configuration value lies outside its hyperparameter's domain.
    #[error("out of domain: hyperparameter '{name}': {reason}")]
    OutOfDomain { name: String, reason: String },

    /// An encoded coordinate lies outside [0, 1] and is not the -1 sentinel.
    #[error("out of range: coordinate {value} at dimension {dim} (expected [0, 1] or -1)")]
    OutOfRange { dim: usize, value: f64 },

    /// A required column is missing from a meta-dataset header.
    #[error("missing column: '{column}'")]
    MissingColumn { column: String },

    /// A cell of a meta-dataset could not be parsed or validated.
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// An objective value is NaN or infinite.
    #[error("non-finite objective at row {row}, column '{column}'")]
    NonFiniteObjective { row: usize, column: String },

    /// Fewer than two rows in a meta-dataset.
    #[error("empty dataset: {rows} row(s), need at least 2")]
    EmptyDataset { rows: usize },

    /// Mismatched dimensions between inputs.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Too few samples to fit a surrogate.
    #[error("degenerate target: {rows} sample(s), need at least 2")]
    DegenerateTarget { rows: usize },

    /// A sensitive group is empty in a demographic-parity computation.
    #[error("empty group: no samples with sensitive value {group}")]
    EmptyGroup { group: u8 },

    /// The analytic importance oracle cannot handle the problem's basis set.
    #[error("unsupported basis: {0}")]
    UnsupportedBasis(String),

    #[error("io error on '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the environment (filesystem) rather than by
    /// invalid inputs; the CLI maps these to a distinct exit code.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
