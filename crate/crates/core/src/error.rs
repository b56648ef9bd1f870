use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("root bracket [{lo}, {hi}] inconclusive after {depth} bisections (residual {residual:e})")]
    InconclusiveBracket {
        lo: f64,
        hi: f64,
        depth: usize,
        residual: f64,
    },

    #[error("degenerate S-matrix eigenvalues at k = {k} (discriminant {discriminant:e})")]
    Degenerate { k: f64, discriminant: f64 },

    #[error("bound-state search hit the continuation pole at kappa = {kappa}")]
    ContinuationPole { kappa: f64 },

    #[error("fake zero mode has no eigenfunction")]
    FakeZeroMode,

    #[error("truncation bound violated: {0}")]
    Truncation(String),

    #[error("non-positive f' = {fprime} at physical root k = {k}")]
    NegativeFPrime { k: f64, fprime: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
