use crate::field::Point2;

/// Errors shared across the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point ({}, {}) outside field window [{xmin}, {xmax}] x [{ymin}, {ymax}]", point.x, point.y)]
    OutOfWindow {
        point: Point2,
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },

    #[error("insufficient margin for finite differences at ({}, {}): need {need}, have {have}", point.x, point.y)]
    InsufficientMargin { point: Point2, need: f64, have: f64 },

    #[error("ball of radius {radius} around ({}, {}) exits the field window", center.x, center.y)]
    BallExitsWindow { center: Point2, radius: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("grid invariant violated: {0}")]
    InvariantViolation(String),

    #[error("degenerate denominator at r = {r}: boundary norm {norm:.3e} below guard")]
    DegenerateDenominator { r: f64, norm: f64 },

    #[error("radius {r} outside admissible range (0, {delta})")]
    RadiusOutOfRange { r: f64, delta: f64 },

    #[error("finite-difference step {h} too large for radius {r}")]
    StepTooLarge { h: f64, r: f64 },

    #[error("insufficient data: need at least {need} samples, got {got}")]
    InsufficientData { need: usize, got: usize },

    #[error("analysis window requires a point on the axis {{y = 0}}, got y = {y}")]
    OffAxis { y: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
