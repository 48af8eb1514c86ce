use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("beta = {beta} is below the existence threshold beta_e = {beta_e}")]
    SubcriticalBeta { beta: f64, beta_e: f64 },
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("closed-form Barenblatt profile requires beta = beta_1 = {beta_1}, got {beta}")]
    WrongBeta { beta: f64, beta_1: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("integration failure at r = {r}: {reason}")]
    IntegrationFailure { r: f64, reason: String },
    #[error("profile lost positivity at r = {0}")]
    PositivityLoss(f64),
    #[error("radius {r} outside the resolved range [0, {r_max}]")]
    OutOfRange { r: f64, r_max: f64 },
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("sign of w on the fit window contradicts the regime: {0}")]
    SignMismatch(String),
    #[error("fitted decay exponent {fitted} is not within 5% of {expected}")]
    SlopeMismatch { fitted: f64, expected: f64 },
    #[error("truncated integral has not stabilized: {0}")]
    DivergentIntegral(String),
    #[error("initial data leaves the required envelope at node {node} (r = {r})")]
    BoundViolation { node: usize, r: f64 },
    #[error("step produced a non-positive value at node {node} after {retries} halvings")]
    NegativeValue { node: usize, retries: usize },
    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("no lambda in [{lo}, {hi}] bounds the state from above")]
    NoFeasibleLambda { lo: f64, hi: f64 },
    #[error("regime error: {0}")]
    Regime(String),
    #[error("need at least 3 slices, got {0}")]
    InsufficientSamples(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by invalid inputs rather than by a failing computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::SubcriticalBeta { .. }
                | Error::UnsupportedRegime(_)
                | Error::WrongBeta { .. }
                | Error::InvalidGrid(_)
                | Error::OutOfRange { .. }
                | Error::GridMismatch(_)
                | Error::Regime(_)
                | Error::BoundViolation { .. }
                | Error::Json(_)
        )
    }
}
