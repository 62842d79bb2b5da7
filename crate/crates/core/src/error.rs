use thiserror::Error;

use crate::eval::Label;
use crate::map::LaneId;
use crate::perturb::ChangeType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate polyline: total length is zero")]
    DegeneratePolyline,

    #[error("degenerate tangent at waypoint {0}")]
    DegenerateTangent(usize),

    #[error("unknown lane id {0}")]
    UnknownLane(LaneId),

    #[error("lane sequence dead-ends at lane {lane} after {reached} of {requested} segments")]
    DeadEnd {
        lane: LaneId,
        reached: usize,
        requested: usize,
    },

    #[error("no lanes available to sample")]
    EmptyMap,

    #[error("point ({x:.3}, {y:.3}) lies outside the ground height grid")]
    OutsideGrid { x: f64, y: f64 },

    #[error("map validation failed for {entity}: {reason}")]
    Validation { entity: String, reason: String },

    #[error("{change_type}: rejection sampling exhausted after {attempts} attempts")]
    RejectionExhausted {
        change_type: ChangeType,
        attempts: usize,
    },

    #[error("{0}: no eligible entity near the ego vehicle")]
    NoEligibleEntity(ChangeType),

    #[error("per-class accuracy undefined: no frames with actual label {0}")]
    DivisionUndefined(Label),

    #[error("no tiles visited at least {0} times")]
    NoQualifyingTiles(u32),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("sweep ring buffer holds {have} of {need} sweeps; rendering not allowed yet")]
    BufferNotFull { have: usize, need: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn format(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(entity: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            entity: entity.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for this error kind. Distinct per variant, never 0.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidGeometry(_) => 10,
            Error::DegeneratePolyline => 11,
            Error::DegenerateTangent(_) => 12,
            Error::UnknownLane(_) => 20,
            Error::DeadEnd { .. } => 21,
            Error::EmptyMap => 22,
            Error::OutsideGrid { .. } => 23,
            Error::Validation { .. } => 24,
            Error::RejectionExhausted { .. } => 30,
            Error::NoEligibleEntity(_) => 31,
            Error::DivisionUndefined(_) => 40,
            Error::NoQualifyingTiles(_) => 41,
            Error::EmptyInput(_) => 42,
            Error::BufferNotFull { .. } => 50,
            Error::InvalidParameter(_) => 51,
            Error::Format { .. } => 60,
            Error::Io(_) => 61,
            Error::Json(_) => 62,
        }
    }
}
