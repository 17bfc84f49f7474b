use std::fmt;

/// Which δ-ring setting an operation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Truncated Witt ring with Frobenius lift and p-derivation.
    Arithmetic,
    /// Truncated power series with the derivation d/dt.
    Kolchin,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Arithmetic => f.write_str("arithmetic"),
            BackendKind::Kolchin => f.write_str("kolchin"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid ring parameters: {0}")]
    InvalidParams(String),

    #[error("precision exhausted in {op}: need {needed}, have {available}")]
    PrecisionExhausted {
        op: &'static str,
        needed: u32,
        available: u32,
    },

    #[error("not a unit: {value}")]
    NonUnit { value: String },

    #[error("`{op}` is not available on the {backend} backend")]
    Unsupported {
        op: &'static str,
        backend: BackendKind,
    },

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("term limit exceeded: {terms} terms > limit {limit}")]
    TermLimit { terms: usize, limit: usize },

    #[error("non-unit minor Delta_{index} = {value}")]
    NonUnitMinor { index: usize, value: String },

    #[error("inconsistent linear system: {0}")]
    InconsistentSystem(String),

    #[error("no unit pivot in column {column} (smallest valuation {valuation})")]
    SingularPivot { column: usize, valuation: u32 },

    #[error("precondition search exhausted after {attempts} attempts")]
    SearchExhausted { attempts: usize },

    #[error("shape violation: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("evaluation failed on sample {sample}: {source}")]
    Sample {
        sample: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable kebab-case name used in CLI error documents.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid-params",
            Error::PrecisionExhausted { .. } => "precision-exhausted",
            Error::NonUnit { .. } => "non-unit",
            Error::Unsupported { .. } => "unsupported",
            Error::ArityMismatch(_) => "arity-mismatch",
            Error::TermLimit { .. } => "term-limit",
            Error::NonUnitMinor { .. } => "non-unit-minor",
            Error::InconsistentSystem(_) => "inconsistent-system",
            Error::SingularPivot { .. } => "singular-pivot",
            Error::SearchExhausted { .. } => "search-exhausted",
            Error::Shape(_) => "shape-violation",
            Error::Input(_) => "invalid-input",
            Error::Sample { source, .. } => source.name(),
        }
    }

    /// True when the root cause is running out of p-adic (or t-adic) digits.
    pub fn is_precision(&self) -> bool {
        match self {
            Error::PrecisionExhausted { .. } | Error::SingularPivot { .. } => true,
            Error::Sample { source, .. } => source.is_precision(),
            _ => false,
        }
    }

    pub(crate) fn at_sample(self, sample: usize) -> Error {
        Error::Sample {
            sample,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
