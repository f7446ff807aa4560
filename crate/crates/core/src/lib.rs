//! Flying base station fleet simulator.
//!
//! Each snapshot places a minimal fleet with an exact MILP, routes FBSs
//! around buildings on a visibility graph and assigns them to the new
//! hovering points with a minimum-energy matching.

pub mod channel;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod placement;
pub mod routing;
pub mod scenario;
pub mod simulation;
pub mod trajectory;

pub use error::{Error, Result};
