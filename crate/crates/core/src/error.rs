use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains NaN or infinite entries ({0})")]
    NonFiniteInput(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("polyhedron is empty")]
    EmptyPolyhedron,

    #[error("set is unbounded")]
    Unbounded,

    #[error("Fourier-Motzkin elimination produced {rows} rows (cap {cap})")]
    EliminationBlowup { rows: usize, cap: usize },

    #[error("activation pattern space 2^{neurons} exceeds the cap 2^{cap}")]
    PatternSpaceTooLarge { neurons: usize, cap: usize },

    #[error("reach set grew to {count} regions at layer {layer} (cap {cap})")]
    RegionCapExceeded {
        layer: usize,
        count: usize,
        cap: usize,
    },

    #[error("equality constraints cannot be complemented")]
    EqualityNotComplementable,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("shape error in layer {layer}: {message}")]
    Shape { layer: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simplex failed to converge after {0} pivots")]
    NumericalFailure(usize),

    #[error("could not draw samples from piece {0}")]
    SamplingFailed(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Resource-cap failures, as opposed to malformed input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::EliminationBlowup { .. }
                | Error::PatternSpaceTooLarge { .. }
                | Error::RegionCapExceeded { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFiniteInput(_) => "NonFiniteInput",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptyPolyhedron => "EmptyPolyhedron",
            Error::Unbounded => "Unbounded",
            Error::EliminationBlowup { .. } => "EliminationBlowup",
            Error::PatternSpaceTooLarge { .. } => "PatternSpaceTooLarge",
            Error::RegionCapExceeded { .. } => "RegionCapExceeded",
            Error::EqualityNotComplementable => "EqualityNotComplementable",
            Error::Parse { .. } => "ParseError",
            Error::Shape { .. } => "ShapeError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::SamplingFailed(_) => "SamplingFailed",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
