use thiserror::Error;

/// Errors surfaced by the construction pipeline and its supporting modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("region mask is empty")]
    EmptyRegion,

    #[error("resolution too coarse: dilation radius falls under 2 cells, need at least {min_resolution} cells per unit")]
    ResolutionTooCoarse { min_resolution: u32 },

    #[error("separation between stage sets is below 4 grid cells at stage {stage}; increase resolution")]
    SeparationTooSmall { stage: usize },

    #[error("target pieces '{a}' and '{b}' are separated by {cells} cells or fewer")]
    PieceOverlap { a: String, b: String, cells: u32 },

    #[error("approximation stalled after {doublings} degree doublings; best certified bound {best:.3e} > requested {requested:.3e}")]
    ApproximationStalled {
        doublings: u32,
        best: f64,
        requested: f64,
    },

    #[error("least-squares system ill-conditioned: estimated condition {cond:.3e} exceeds cap {cap:.3e}")]
    IllConditioned { cond: f64, cap: f64 },

    #[error("margin budget exhausted at stage {stage}: next epsilon would be {epsilon:.3e}")]
    MarginExhausted { stage: usize, epsilon: f64 },

    #[error("stage {stage} rejected: {condition} violated, measured margin {margin:.6e}")]
    StageRejected {
        stage: usize,
        condition: String,
        margin: f64,
    },

    #[error("escape violation at point ({re}, {im}), step {step}: {detail}")]
    EscapeViolation {
        re: f64,
        im: f64,
        step: usize,
        detail: String,
    },

    #[error("capture violation at point ({re}, {im}), step {step}: {detail}")]
    CaptureViolation {
        re: f64,
        im: f64,
        step: usize,
        detail: String,
    },

    #[error("point ({re}, {im}) is not separated from the compact set within the computed stages")]
    NotSeparatedWithinComputedStages { re: f64, im: f64 },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("bad scale list: {0}")]
    BadScales(String),

    #[error("snowflake placement overlaps: {0}")]
    PlacementOverlap(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(String),
}

impl CoreError {
    /// Process exit code for the CLI: 1 verification failure, 2 input error,
    /// 3 internal cap reached.
    pub fn exit_code(&self) -> i32 {
        use CoreError::*;
        match self {
            EscapeViolation { .. }
            | CaptureViolation { .. }
            | StageRejected { .. }
            | NotSeparatedWithinComputedStages { .. } => 1,
            EmptyRegion | InvalidInput(_) | Io(_) | Json(_) | Image(_) | BadScales(_)
            | PlacementOverlap(_) | PieceOverlap { .. } => 2,
            SizeCap(_) | MarginExhausted { .. } | ResolutionTooCoarse { .. }
            | SeparationTooSmall { .. } | ApproximationStalled { .. } | IllConditioned { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
