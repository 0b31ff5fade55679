use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("candidate index {index} out of range (election has {num_candidates} candidates)")]
    CandidateOutOfRange { index: usize, num_candidates: usize },
    #[error("voter index {index} out of range (election has {num_voters} voters)")]
    VoterOutOfRange { index: usize, num_voters: usize },
    #[error("invalid election: {0}")]
    InvalidElection(String),
    #[error("committee size {k} out of range for {num_candidates} candidates")]
    CommitteeSize { k: usize, num_candidates: usize },
    #[error("invalid committee: {0}")]
    InvalidCommittee(String),
    #[error("weight vector has length {len} but committee size is {k}")]
    WeightLength { len: usize, k: usize },
    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation {op} is infeasible{}: {reason}", position.map(|i| format!(" at position {i}")).unwrap_or_default())]
    InfeasibleOperation {
        op: String,
        position: Option<usize>,
        reason: String,
    },
    #[error("enumeration of {required} {what} exceeds the cap of {cap}")]
    CapExceeded {
        what: String,
        required: String,
        cap: u64,
    },
    #[error("budget {budget} exceeds the {slots} available slots")]
    BudgetExceedsSlots { budget: usize, slots: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn cap(what: &str, required: impl ToString, cap: u64) -> Self {
        Error::CapExceeded {
            what: what.to_string(),
            required: required.to_string(),
            cap,
        }
    }

    /// Whether the error signals an exceeded enumeration or size cap.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::TooLarge(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
