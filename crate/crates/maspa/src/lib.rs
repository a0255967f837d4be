//! Path planning for a tethered UGV+UAV marsupial system among cuboid obstacles.
//!
//! The system is a ground vehicle that carries a tethered aerial vehicle to a
//! take-off position, from which the UAV flies inside a vertical plane to an
//! aerial target. The toolkit computes the feasible take-off locus under a
//! taut-tether (polygonal chain) model, approximates it under a loose-tether
//! (catenary) model, and plans minimum total-length ground+aerial paths over
//! an augmented visibility graph. An RRT*-based baseline and a reproducible
//! benchmark harness are included for comparison studies.

pub mod baseline;
pub mod catenary;
pub mod cli;
pub mod geometry;
pub mod oracle;
pub mod planner;
pub mod pva2d;
pub mod pva3d;
pub mod scenario;

pub use geometry::{Cuboid, MarsupialParams, PlanarScene, PlaneFrame, Point3, Rect2, Scene};
pub use planner::{PlanResult, PlannerParams};
pub use pva3d::{CandidateTakeoff, Tether, TetherMode};

/// Errors produced by planners, solvers and scenario construction.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Requested catenary arc length is shorter than the anchor chord.
    #[error("arc length {arc_length} shorter than anchor chord {chord}")]
    ShorterThanChord { arc_length: f64, chord: f64 },
    /// Anchors are vertically aligned and the requested length exceeds the gap.
    #[error("vertically aligned anchors admit no catenary of length {0}")]
    VerticalAnchors(f64),
    /// No take-off candidate survived sampling and filtering.
    #[error("no feasible take-off candidates")]
    NoCandidates,
    /// The target cannot be reached from the start configuration.
    #[error("target {0} unreachable")]
    Unreachable(usize),
    /// Random scenario generation exhausted its rejection budget.
    #[error("scenario generation failed after {0} rejection attempts")]
    GenerationFailed(usize),
    /// Name passed to the realistic-scene builder is not known.
    #[error("unknown scenario name: {0}")]
    UnknownScenario(String),
    /// Scene violates a structural invariant.
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
