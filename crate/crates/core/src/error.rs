use crate::geometry::Frame;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("expected corners in the {expected:?} frame, got {found:?}")]
    WrongFrame { expected: Frame, found: Frame },

    #[error("corner set has no buttons")]
    EmptyCornerSet,

    #[error("homogeneous coordinate of button {button} corner {corner} is {value}, expected 1")]
    NotHomogeneous { button: usize, corner: usize, value: f64 },

    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),

    #[error("point at infinity: depth {depth:e} of button {button} corner {corner}")]
    DegenerateDepth { button: usize, corner: usize, depth: f64 },

    #[error("pose yields a near-singular homography (condition number {condition:e})")]
    DegeneratePose { condition: f64 },

    #[error("button {button} has a zero-length edge")]
    DegenerateButton { button: usize },

    #[error("cannot normalize an empty population")]
    EmptyPopulation,

    #[error("invalid search configuration: {0}")]
    InvalidSearchConfig(String),

    #[error("detected panel has {detected} buttons but the reference has {reference}")]
    ButtonCountMismatch { detected: usize, reference: usize },

    #[error("every pose hypothesis was degenerate")]
    NoSolution,

    #[error("line detection found {found} lines, need at least 4")]
    LineDetection { found: usize },

    #[error("cannot assemble a quadrilateral: {0}")]
    QuadAssembly(String),

    #[error("lines are parallel (|sin| = {sin:e})")]
    NoIntersection { sin: f64 },

    #[error("cannot order corners: {0}")]
    CornerOrdering(String),

    #[error("mask contains no button regions")]
    EmptyPanel,

    #[error("corner detection failed for all {0} button regions")]
    AllButtonsFailed(usize),

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("distorted corner ({x:.2}, {y:.2}) falls outside the {width}x{height} frame")]
    OutOfFrame { x: f64, y: f64, width: u32, height: u32 },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
