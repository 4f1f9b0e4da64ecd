use alloc::string::String;

/// Which axis of a context an index or identifier refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Object,
    Attribute,
    Condition,
}

impl core::fmt::Display for Axis {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Axis::Object => "object",
            Axis::Attribute => "attribute",
            Axis::Condition => "condition",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{axis} index {index} out of range (size {size})")]
    IndexOutOfRange { axis: Axis, index: usize, size: usize },

    #[error("duplicate {axis} identifier {id:?}")]
    DuplicateIdentifier { axis: Axis, id: String },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("context too large for exact enumeration: {objects} objects exceeds cap {cap}")]
    ContextTooLarge { objects: usize, cap: usize },

    #[error("duplicate extent in concept list at positions {first} and {second}")]
    DuplicateExtent { first: usize, second: usize },

    #[error("empty concept list")]
    EmptyConceptList,

    #[error("invalid value at {location}: {value}")]
    InvalidValue { location: String, value: f64 },

    #[error("{0}")]
    Invalid(String),

    #[error("pattern axis is empty")]
    EmptyPatternAxis,

    #[error("degenerate score matrix: all log-scores equal")]
    DegenerateScores,

    #[error("scores not normalized into [0, 1]: {value} at ({row}, {col})")]
    NotNormalized { row: usize, col: usize, value: f64 },

    #[error("threshold alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("sigmoid scale must be non-zero")]
    ZeroScale,

    #[error("invalid pattern {id:?}: {reason}")]
    InvalidPattern { id: String, reason: String },

    #[error("token {0:?} contains the mask placeholder")]
    TokenContainsMask(String),

    #[error("context has no incident pairs")]
    EmptyIncidence,

    #[error("noise rate {0} outside [0, 1)")]
    NoiseRateOutOfRange(f64),

    #[error("noise requested but the context has no non-incident pairs")]
    NoNonIncidentPairs,

    #[error("provider error: {0}")]
    Provider(String),

    #[error("provider distribution sums to {sum}, expected 1 ± 1e-6")]
    DistributionNotNormalized { sum: f64 },

    #[error("provider returned an empty vocabulary")]
    EmptyVocabulary,

    #[error("no gold positives to evaluate")]
    NoGoldPositives,

    #[error("no identifiers shared between scores and gold ({axis} axis)")]
    NoAlignedIdentifiers { axis: Axis },

    #[error("gold context has no nontrivial concepts")]
    NoNontrivialConcepts,

    #[error("density {actual:.4} disagrees with metadata {declared:.4}")]
    DensityMismatch { declared: f64, actual: f64 },

    #[error("lattices are over different universes")]
    UniverseMismatch,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
