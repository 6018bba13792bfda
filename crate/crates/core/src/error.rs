use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field is not admissible: {0}")]
    NotAdmissible(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("grid too coarse for construction: {0}")]
    ResolutionTooCoarse(String),
    #[error("B(u) is empty")]
    EmptyB,
    #[error("truncated projection Pi_M(B) is empty")]
    EmptyPiM,
    #[error("every column of Pi(B) lies entirely in B (tau = 1)")]
    TauOne,
    #[error("degenerate interval: y2 = {y2} <= y1 = {y1}")]
    DegenerateInterval { y1: f64, y2: f64 },
    #[error("proportional band is empty: delta = {delta} < 16 eps^2 = {threshold}")]
    BandEmpty { delta: f64, threshold: f64 },
    #[error("gradient requires a positive smoothing width")]
    ZeroSmoothing,
    #[error("radial profile is nonzero beyond R = 2")]
    UnsupportedProfile,
    #[error("minimization diverged: energy {energy} exceeds {limit}")]
    Diverged { energy: f64, limit: f64 },
    #[error("no predicate flip found for delta in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },
    #[error("field dump parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Diverged { .. } | Error::BracketNotFound { .. })
    }
}
