use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dyadic depth {got} does not determine a frequency of width {needed}")]
    DepthTooSmall { needed: usize, got: usize },

    #[error("depth {depth} exceeds the dense limit of {max}")]
    DepthOverflow { depth: usize, max: usize },

    #[error("product needs {pairs} pair products, budget is {budget}")]
    TermBudgetExceeded { pairs: u128, budget: u128 },

    #[error("block of {terms} terms exceeds the materialization cap of {cap}")]
    MaterializationCap { terms: u128, cap: u128 },

    #[error("order {order} exceeds the cap of {cap}")]
    OrderCap { order: u32, cap: u32 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("growth schedule must be strictly increasing and positive: {0:?}")]
    NonIncreasingSchedule(Vec<u32>),

    #[error("growth schedule {0:?} overflows 128-bit block indexing")]
    ScheduleOverflow(Vec<u32>),

    #[error("frequency {0} lies outside the plan horizon")]
    OutsideHorizon(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("unknown corpus generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by a computation being too large to carry out,
    /// as opposed to malformed input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::DepthOverflow { .. }
                | Error::TermBudgetExceeded { .. }
                | Error::MaterializationCap { .. }
                | Error::OrderCap { .. }
                | Error::ScheduleOverflow(_)
        )
    }
}
