use thiserror::Error;

/// Errors for simulation and geometry computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("state is not normalized (sum |amplitude|^2 = {0})")]
    NotNormalized(f64),

    #[error("zero vector has no ray")]
    ZeroVector,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("negative curvature {0} cannot carry a real frequency")]
    NegativeCurvature(f64),

    #[error("integration diverged at tau = {tau}")]
    Divergence { tau: f64 },

    #[error("nonpositive {name}: {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("negative {name}: {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("grid too coarse: max phase step per node {phase_step:.3} rad exceeds pi")]
    GridTooCoarse { phase_step: f64 },

    #[error("stability bound violated: {0}")]
    StabilityBound(String),

    #[error("phase unwrap failed: |psi| = {amplitude:.3e} below threshold at grid index {index}")]
    UnwrapFailure { index: usize, amplitude: f64 },

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
