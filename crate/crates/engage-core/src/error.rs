use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("negative value in input (entry {value})")]
    NegativeEntry { value: f64 },

    #[error("producer index {index} out of range (n = {n})")]
    ProducerOutOfRange { index: usize, n: usize },

    #[error("basis feature index {index} out of range (d = {d})")]
    FeatureOutOfRange { index: usize, d: usize },

    #[error("row {row} has L1 norm {norm}, above the allowed 1 + 1e-12")]
    RowNormTooLarge { row: usize, norm: f64 },

    #[error("row {row} is all zeros and cannot be normalized")]
    ZeroRow { row: usize },

    #[error("softmax temperature must be positive and finite, got {tau}")]
    InvalidTau { tau: f64 },

    #[error("empty input: {what}")]
    Empty { what: &'static str },

    #[error("instance too large for enumeration: d^n = {size} exceeds {limit}")]
    InstanceTooLarge { size: u128, limit: u128 },

    #[error("m[{index}] must be positive")]
    NonPositiveCount { index: usize },

    #[error("column '{name}' not found in CSV header")]
    MissingColumn { name: String },

    #[error("line {line}: {reason}")]
    BadRecord { line: u64, reason: String },

    #[error("NMF rank {rank} exceeds min(users, items) = {limit}")]
    RankTooLarge { rank: usize, limit: usize },

    #[error("user {row} has an all-zero factor row after training")]
    ZeroFactorRow { row: usize },

    #[error("malformed users CSV: {reason}")]
    BadUsersFile { reason: String },

    #[error("malformed profile file: {reason}")]
    BadProfileFile { reason: String },

    #[error("invalid sweep spec: {reason}")]
    BadSweepSpec { reason: String },

    #[error("results file has no data rows")]
    EmptyResults,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
