//! Small exact MILP toolkit: a model container with LP-format export, a
//! bounded dual simplex, and branch-and-bound on top of it.
//!
//! All variables must be boxed. That restriction is what lets the simplex
//! start every solve from a dual feasible basis.

pub mod bnb;
pub mod model;
pub mod simplex;

pub use bnb::{branch_and_bound, BnbOptions, BnbResult, BnbStatus};
pub use model::{Model, ModelError, Row, Var};
pub use simplex::{solve_lp, Basis, DualSimplex, LpSolution, LpStatus};
