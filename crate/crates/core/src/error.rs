use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set of size {0} exceeds the limit of {max}", max = crate::MAX_GROUND_SET)]
    GroundSetTooLarge(usize),

    #[error("exhaustive enumeration over {n} elements exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("element {element} is outside the ground set [0, {n})")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("ground-set mismatch: expected {expected}, found {found}")]
    GroundSetMismatch { expected: usize, found: usize },

    #[error("family is improper: {0}")]
    ImproperFamily(&'static str),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(String),

    #[error("invalid rational {0:?}")]
    ParseRational(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("all weights are zero")]
    ZeroWeights,

    #[error("candidate count exceeds the cap of {cap}; restrict the family to fewer or smaller minimal sets")]
    CandidateCap { cap: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("parameter guard failed: {0}")]
    Guard(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GroundSetTooLarge(_) => "ground_set_too_large",
            Error::EnumerationCap { .. } => "enumeration_cap",
            Error::ElementOutOfRange { .. } => "element_out_of_range",
            Error::GroundSetMismatch { .. } => "ground_set_mismatch",
            Error::ImproperFamily(_) => "improper_family",
            Error::ProbabilityOutOfRange(_) => "probability_out_of_range",
            Error::ParseRational(_) => "parse_rational",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::ZeroWeights => "zero_weights",
            Error::CandidateCap { .. } => "candidate_cap",
            Error::Infeasible => "infeasible",
            Error::Guard(_) => "guard",
            Error::Certificate(_) => "certificate",
            Error::Internal(_) => "internal",
            Error::Format(_) => "format",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
