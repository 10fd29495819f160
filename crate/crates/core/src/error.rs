use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid process: {0}")]
    InvalidProcess(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid stopping time: {0}")]
    InvalidStoppingTime(String),

    #[error("level {level} out of range (tree has levels 0..={max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("stopping-time enumeration would produce {count} items, above the guard {guard}; use the dynamic-programming evaluator instead")]
    EnumerationGuard { count: String, guard: usize },

    #[error("process is not predictable: {0}")]
    NotPredictable(String),

    #[error("measure is not normalized: total mass {mass}")]
    NotNormalized { mass: String },

    #[error("empty control set")]
    EmptyControlSet,

    #[error("control does not match requested dual form: {0}")]
    FormMismatch(String),

    #[error("invalid dual control: {0}")]
    InvalidControl(String),

    #[error("bisection bracket failed; membership is not monotone: {0}")]
    BracketFailure(String),

    #[error("contraction guard violated: dt * lipschitz = {product} > 1/2")]
    ContractionGuard { product: f64 },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual})")]
    FixedPointDivergence { iterations: usize, residual: f64 },

    #[error("measure tilt leaves the open unit interval: |mu| * sqrt(dt) = {value} >= 1")]
    TiltClamp { value: f64 },

    #[error("driver check failed: {0}")]
    DriverCheck(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
