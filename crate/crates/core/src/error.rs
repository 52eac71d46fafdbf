use thiserror::Error;

/// Errors raised by the flow library. Numerical values are carried as `f64`
/// regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum YamabeError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid field: value {value} at node {node} must be positive and finite")]
    InvalidField { node: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("preset {preset} requires a {required} background, mesh is {found}")]
    PresetMismatch {
        preset: &'static str,
        required: &'static str,
        found: &'static str,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("step to t = {t} failed: u = {value} at node {node} (r = {r}) after {retries} retries")]
    StepFailure {
        node: usize,
        r: f64,
        value: f64,
        t: f64,
        retries: usize,
    },

    #[error("singular tridiagonal system at row {row}")]
    SingularSystem { row: usize },

    #[error("exhaustion level {level} (radius {radius}) failed: {source}")]
    Level {
        level: usize,
        radius: f64,
        #[source]
        source: Box<YamabeError>,
    },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = YamabeError> = std::result::Result<T, E>;
