use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("warp parameter {name}={value} violates {constraint}")]
    InvalidWarpParameter {
        name: &'static str,
        value: f64,
        constraint: String,
    },

    #[error("f value {value} at vertex {vertex} outside warp domain ({lo}, {hi}) (margin {margin})")]
    FOutsideDomain {
        vertex: usize,
        value: f64,
        lo: f64,
        hi: f64,
        margin: f64,
    },

    #[error("subdivision level {level} exceeds the memory guard ({max})")]
    LevelTooDeep { level: u32, max: u32 },

    #[error("face index {face} out of range (mesh has {n_faces} faces)")]
    BadFaceIndex { face: usize, n_faces: usize },

    #[error("degenerate face {face} (area {area:.3e})")]
    DegenerateFace { face: usize, area: f64 },

    #[error("field length {got} does not match vertex count {expected}")]
    FieldLengthMismatch { expected: usize, got: usize },

    #[error("ball radius {radius} outside (0, pi)")]
    BadBallRadius { radius: f64 },

    #[error("scale*R = {scale_r} violates the stereographic injectivity guard (< 1); try R <= {suggested_r:.3}")]
    ChartGuard { scale_r: f64, suggested_r: f64 },

    #[error("alpha = {alpha} outside supported range [{lo}, {hi}]")]
    AlphaOutOfRange { alpha: f64, lo: f64, hi: f64 },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("invalid alpha schedule: {0}")]
    InvalidSchedule(String),

    #[error("degree {d} exceeds the supported range |d| <= {max}")]
    DegreeTooLarge { d: i32, max: i32 },

    #[error("neck zones overlap: R0*eps0 = {inner} must be < delta0 = {outer} < 1")]
    ZoneOverlap { inner: f64, outer: f64 },

    #[error("neck path must start at 0 (path(0) = {got})")]
    PathNotAnchored { got: f64 },

    #[error("annulus [{inner}, {outer}] is empty or outside the chart")]
    EmptyAnnulus { inner: f64, outer: f64 },

    #[error("epsilon policy invalid: {0}")]
    PolicyViolation(String),

    #[error("family of length {len} is too short (need >= 2 members)")]
    FamilyTooShort { len: usize },

    #[error("family alphas must be >= 1 and non-increasing toward 1")]
    FamilyNotOrdered,

    #[error("precision {got} bits is insufficient; need >= {required} bits for t = {t:.6}")]
    InsufficientPrecision { required: usize, got: usize, t: f64 },

    #[error("root bracket for k = {k} shows no sign change (should not happen)")]
    BracketFailure { k: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("theorem check failed: {0}")]
    TheoremCheck(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
