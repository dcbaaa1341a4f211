use thiserror::Error;

use crate::geometry::Vec2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("degenerate hyperbola: focal distance {distance} does not exceed 2a = {two_a}")]
    DegenerateBranch { distance: f64, two_a: f64 },

    #[error("point {point} is off the hyperbola branch (residual {residual:e})")]
    OffCurve { point: Vec2, residual: f64 },

    #[error("agents {0} and {1} have coincident centers")]
    CoincidentCenters(usize, usize),

    #[error("agent {id}: {reason}")]
    InvalidAgent { id: usize, reason: String },

    #[error("agent {id} has no guaranteed sensing region (r_s = {r_s} <= r_u = {r_u})")]
    NoGuaranteedSensing { id: usize, r_s: f64, r_u: f64 },

    #[error("unknown agent id {0}")]
    UnknownAgent(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("broken cell boundary: {0}")]
    BrokenLoop(String),

    #[error(
        "step {step}: uncertainty disks of agents {i} and {j} meet (center distance {distance})"
    )]
    Collision {
        step: usize,
        i: usize,
        j: usize,
        distance: f64,
    },
}
