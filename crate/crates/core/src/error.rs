use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point has non-positive depth in the camera frame (z = {0})")]
    NonPositiveDepth(f64),
    #[error("image line is degenerate")]
    DegenerateLine,
    #[error("rotation angle too close to pi for a unique logarithm")]
    NearPiAngle,
    #[error("image lines are parallel")]
    ParallelLines,
    #[error("image corners are coincident")]
    CoincidentCorners,
    #[error("no feasible target pose found after {0} attempts")]
    InfeasibleScene(usize),
    #[error("no LIDAR return hit the target")]
    NoReturns,
    #[error("target not visible from camera `{0}`")]
    TargetNotVisible(String),
    #[error("RANSAC found no consensus (best inlier ratio {0:.3})")]
    NoConsensus(f64),
    #[error("edge {edge} has only {inliers} supporting points")]
    MissingEdge { edge: usize, inliers: usize },
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),
    #[error("planar pose is behind the camera or mirrored")]
    Chirality,
    #[error("iterative refinement did not converge")]
    DidNotConverge,
    #[error("insufficient views: {0}")]
    InsufficientViews(String),
    #[error("non-finite cost or jacobian")]
    NumericalFailure,
    #[error("sensor graph is disconnected")]
    DisconnectedGraph,
    #[error("unknown sensor `{0}`")]
    UnknownSensor(String),
    #[error("sensor `{0}` has the wrong kind for this operation")]
    WrongSensorKind(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
