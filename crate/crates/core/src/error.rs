use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point {0} lies inside an obstacle")]
    PointInsideObstacle(usize),
    #[error("snapshot interval undefined: every user is stationary")]
    AllStationary,
    #[error("no feasible fleet size up to {0} candidates")]
    NoFeasibleFleet(usize),
    #[error("schedule overrun: {0}")]
    ScheduleOverrun(String),
    #[error("assignment infeasible: {0}")]
    AssignmentInfeasible(String),
    #[error("no path from vertex {0} to vertex {1}")]
    Unreachable(usize, usize),
    #[error("episode aborted: {0}")]
    EpisodeAborted(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
