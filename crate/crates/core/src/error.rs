use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: n = {n}, D = {dim} (both must be at least 1)")]
    InvalidBox { n: u32, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {coord} outside 0..{n}")]
    PointOutOfBox { coord: u32, n: u32 },

    #[error("level {level} out of range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("point {point} is not in level {level}")]
    NotInLevel { point: String, level: usize },

    #[error("{what} cap exceeded: {size} > {cap}")]
    CapExceeded {
        what: &'static str,
        size: String,
        cap: usize,
    },

    #[error("infeasible fractional matching: {0}")]
    Infeasible(String),

    #[error("malformed down-set: {0}")]
    MalformedDownSet(String),

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("non-integral result {0} (implementation bug)")]
    NonIntegral(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error(
        "container premise violated in round {round}: a set of {set_size} points has {pairs} comparable pairs, fewer than {required}"
    )]
    PremiseViolated {
        round: usize,
        set_size: usize,
        pairs: u64,
        required: String,
        witness: Vec<crate::Point>,
    },

    #[error("{0}")]
    Degenerate(String),

    #[error("internal invariant broken: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }

    /// A short snake-case name for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidBox { .. } => "invalid_box",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::PointOutOfBox { .. } => "point_out_of_box",
            Error::LevelOutOfRange { .. } => "level_out_of_range",
            Error::NotInLevel { .. } => "not_in_level",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::Infeasible(_) => "infeasible",
            Error::MalformedDownSet(_) => "malformed_down_set",
            Error::MalformedPartition(_) => "malformed_partition",
            Error::NonIntegral(_) => "non_integral",
            Error::OutOfRange(_) => "out_of_range",
            Error::PremiseViolated { .. } => "premise_violated",
            Error::Degenerate(_) => "degenerate",
            Error::Internal(_) => "internal",
        }
    }
}
