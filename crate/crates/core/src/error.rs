use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("an outcome space needs at least one outcome")]
    EmptySpace,
    #[error("outcome labels must be non-empty")]
    EmptyLabel,
    #[error("duplicate outcome label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("outcome `{0}` appears more than once")]
    DuplicateOutcome(String),
    #[error("outcome `{0}` is missing from the order")]
    MissingOutcome(String),
    #[error("tiers must be non-empty")]
    EmptyTier,
    #[error("strict constraints form a cycle through `{0}` and `{1}`")]
    Cycle(String, String),
    #[error("`{0}` and `{1}` are indifferent but also strictly ordered")]
    StrictWithinClass(String, String),
    #[error("orders are defined over different outcome spaces")]
    SpaceMismatch,
    #[error("a conflict needs two distinct outcomes, got `{0}` twice")]
    SameOutcome(String),
    #[error("restriction to an empty subset")]
    EmptySubset,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} exceeds the cap ({size} > {cap})")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate case name `{0}`")]
    DuplicateCase(String),
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("the case base is empty")]
    EmptyCaseBase,
    #[error("need at least {needed} orders, got {got}")]
    TooFewOrders { needed: usize, got: usize },
    #[error("distributions have different supports ({0} vs {1})")]
    SupportMismatch(usize, usize),
    #[error("simulated answer contradicts the elicited order: {0}")]
    InconsistentAnswer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
