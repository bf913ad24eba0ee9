use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} is within {margin:e} of the domain boundary; the stencil needs {needed:e}")]
    BoundaryMargin {
        point: Vec<f64>,
        margin: f64,
        needed: f64,
    },

    #[error("map produced a non-finite value at {point:?}")]
    Evaluation { point: Vec<f64> },

    #[error("curve leaves the domain at parameter t = {t}")]
    DomainExit { t: f64 },

    #[error("curve has length below {0:e}; distortion ratio is undefined")]
    DegenerateCurve(f64),

    #[error("curve family is empty; nothing to check")]
    EmptyFamily,

    #[error("all Jacobian samples were unreliable; report would be vacuous")]
    InconclusiveSamples,

    #[error("target lies within {distance:e} of the boundary image (threshold {threshold:e})")]
    TargetTooClose { distance: f64, threshold: f64 },

    #[error("degree computation inconclusive: {0}")]
    InconclusiveDegree(String),

    #[error("no cell of the continuity grid qualified; the map is too rough at this resolution")]
    EmptyLusinSet,

    #[error("constant selection requires the stretch minimum below 1/M (got {alpha} vs {bound})")]
    ConstantPrecondition { alpha: f64, bound: f64 },

    #[error("{stage}: no ladder value satisfied the continuity bound (floor {floor:e}); {detail}")]
    ContinuityFailure {
        stage: &'static str,
        floor: f64,
        detail: String,
    },

    #[error("density test failed at every ladder radius (best fraction {best_fraction} vs required {required})")]
    DensityFailure { best_fraction: f64, required: f64 },

    #[error("direction search exhausted {budget} samples (best ray measure {best} vs threshold {threshold:e})")]
    DirectionSearch {
        budget: usize,
        best: f64,
        threshold: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown map spec '{0}'")]
    UnknownMap(String),

    #[error("operation requires dimension {expected}, got {got}")]
    UnsupportedDimension { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
