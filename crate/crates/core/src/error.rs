use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("t must be even and positive, got {0}")]
    OddOrder(u32),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("p must lie strictly inside (0,1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("color class list is empty")]
    EmptyClasses,
    #[error("color class sizes must be positive")]
    EmptyClass,
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graph has {n} vertices, above the exact-coloring limit of {limit}; use the greedy bound")]
    TooLargeForExact { n: usize, limit: usize },
    #[error("graph format: {0}")]
    GraphFormat(String),
    #[error("improper coloring: edge {0}-{1} is monochromatic")]
    ImproperColoring(usize, usize),
    #[error("color ids must be contiguous from 0; color {0} is unused")]
    UnusedColor(usize),
    #[error("index {index} out of range for a family of {m} variables")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("threshold {p_num} exceeds the field size {prime}")]
    ThresholdOutOfRange { p_num: u64, prime: u64 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("not checkable exhaustively: seed space of {size} exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("insufficient independence order: letters are {t}-wise independent but each window reads {per_window} independent values, leaving order {order} < 2")]
    InsufficientIndependence { t: u32, per_window: usize, order: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
