use thiserror::Error;

/// Errors produced by the norm, operator and verification routines.
///
/// Variants that correspond to a violated mathematical hypothesis report
/// it through [`Error::is_hypothesis_violation`], which the command-line
/// front-end maps onto its own exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent violates the hypothesis 1< essinf q(x) = q_- <= q_+ = esssup q(x) < infinity (q_- = {q_minus}, q_+ = {q_plus})")]
    ExponentNotInP { q_minus: f64, q_plus: f64 },

    #[error("fractional order beta = {beta} violates 0 < beta < n/(q_1)_+ = {limit}")]
    BetaOutOfRange { beta: f64, limit: f64 },

    #[error("Herz-Morrey parameters violate 0 <= lambda < infinity, 0 < p < infinity: {0}")]
    SpaceParameters(String),

    #[error("eta must be positive, got {0}")]
    NonPositiveEta(f64),

    #[error("function has non-finite sample at grid index {index}")]
    NonFinite { index: usize },

    #[error("annulus index k = {k} outside the truncation range [{k_min}, {k_max}]")]
    AnnulusOutOfRange { k: i32, k_min: i32, k_max: i32 },

    #[error("ball B(0, 2^{k}) does not fit the grid of half-width {half_width}")]
    BallExceedsGrid { k: i32, half_width: f64 },

    #[error("ball B(0, 2^{k}) contains no grid point")]
    BallBelowResolution { k: i32 },

    #[error("annulus A_{k} holds {points} grid points, the resolution guard needs at least {required}")]
    ResolutionGuard { k: i32, points: usize, required: usize },

    #[error("support of f is not contained in the annulus A_{k}")]
    SupportSpansAnnuli { k: i32 },

    #[error("support of f reaches outside the ball B_{k_max}")]
    SupportOutsideGrid { k_max: i32 },

    #[error("support of f is not contained in the annuli A_{k_min}..A_{k_max}")]
    SupportOutsideRange { k_min: i32, k_max: i32 },

    #[error("evaluation zone for {condition} is empty on this grid")]
    EmptyZone { condition: String },

    #[error("need at least {needed} samples, got {got}")]
    Degenerate { needed: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid descriptor: {0}")]
    Descriptor(String),

    #[error("operator {name}: {reason}")]
    Operator { name: String, reason: String },

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for errors that reject an input because it fails a hypothesis of
    /// the underlying mathematics (as opposed to malformed input).
    pub fn is_hypothesis_violation(&self) -> bool {
        !matches!(self, Error::Descriptor(_) | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
