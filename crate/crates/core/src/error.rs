use thiserror::Error;

/// Errors reported by the library.
///
/// Precondition violations on hot-path geometry calls (out-of-range vertex
/// ids, full occupancy states) are caller bugs and panic instead; the
/// variants here cover regime limits, malformed inputs, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polygon size must be between 3 and 128, got {0}")]
    InvalidPolygonSize(usize),

    #[error("state mask {bits:#x} sets bits at or above vertex {n}")]
    InvalidStateMask { bits: u128, n: usize },

    #[error("n={n} exceeds the exact-mode limit {limit}; use the Monte Carlo regime")]
    ExactLimitExceeded { n: usize, limit: usize },

    #[error("n={n} exceeds the {limit}-vertex cap for full 2^n state tables")]
    StateSpaceTooLarge { n: usize, limit: usize },

    #[error("need at least 2 runs for a sample standard deviation, got {0}")]
    TooFewRuns(usize),

    #[error("at least 1 sample per state is required")]
    NoSamples,

    #[error("value table line {line}, field `{field}`: {message}")]
    TableParse {
        line: usize,
        field: &'static str,
        message: String,
    },

    #[error("value table contains non-canonical state key {mask}")]
    NonCanonicalKey { mask: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
