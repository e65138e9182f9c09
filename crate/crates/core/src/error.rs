use thiserror::Error;

/// Errors produced across code design, dictionary construction and recovery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid root index u={u} for sequence length M={m} (need 0 < u < M)")]
    InvalidRoot { u: usize, m: usize },

    #[error("cyclic shift overflow for root u={u}: {count} codes with n_cs={n_cs} exceed M={m}")]
    ShiftOverflow { u: usize, count: usize, n_cs: usize, m: usize },

    #[error("column {0} has zero norm")]
    DegenerateColumn(usize),

    #[error("matrices have mismatched dimensions: {0}")]
    DimensionMismatch(String),

    #[error("closed-form coherence requires pi*sqrt(2) <= M <= N/2 (M={m}, N={n})")]
    ClosedFormAssumption { m: usize, n: usize },

    #[error("cross-root magnitude requires distinct roots (got u1 = u2 = {0})")]
    SameRoot(usize),

    #[error("n_cs*u = {product} is below the lower bound M*N1/N = {bound:.4}")]
    BoundViolation { product: usize, bound: f64 },

    #[error("requested {requested} codes but only {delivered} could be generated")]
    Capacity { requested: usize, delivered: usize },

    #[error("scenario infeasible: {0}")]
    Infeasible(String),

    #[error("channel of code {code} (delay {delay} + {taps} taps) does not fit in N1={n1}")]
    Truncation { code: usize, delay: usize, taps: usize, n1: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
