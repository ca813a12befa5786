use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point projects onto the principal plane (|w| = {w:e})")]
    DegeneratePoint { w: f64 },
    #[error("rotation is not orthonormal with det +1 (deviation {deviation:e})")]
    InvalidRotation { deviation: f64 },
    #[error("projection matrix is rank deficient (sigma_min/sigma_max = {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("camera centers coincide (baseline {baseline:e})")]
    CoincidentCenters { baseline: f64 },

    #[error("all polynomial coefficients are zero")]
    DegenerateAllZero,
    #[error("residual function returned a non-finite value")]
    NonFiniteResidual,

    #[error("calibration needs at least 6 correspondences, got {found}")]
    InsufficientPoints { found: usize },
    #[error("calibration points are coplanar (relative variance {ratio:e})")]
    DegenerateGeometry { ratio: f64 },

    #[error("triangulated point lies at infinity")]
    PointAtInfinity,
    #[error("triangulation needs at least 2 observations, got {found}")]
    InsufficientObservations { found: usize },
    #[error("observation refers to view {index} but only {count} views exist")]
    InvalidViewIndex { index: usize, count: usize },
    #[error("fundamental matrix is not rank 2")]
    RankDeficientF,
    #[error("epipole coincides with the image point")]
    EpipoleAtPoint,
    #[error("linear initialization failed and the ray-midpoint fallback is undefined")]
    InitializationFailed,
    #[error("{0}")]
    Domain(String),

    #[error("invalid scene specification: {0}")]
    InvalidSpec(String),
    #[error("input is empty")]
    EmptyInput,
    #[error("mismatched input lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Validation(_)
            | Error::Parse { .. }
            | Error::InvalidSpec(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
