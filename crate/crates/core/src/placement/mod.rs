//! Per-snapshot 3D placement: candidate lattice, the placement MILP, an exact
//! solver on top of `fbs-milp`, a greedy incumbent and fleet-size bisection.

mod candidates;
mod heuristic;
mod model;
mod solve;
mod validate;

pub use candidates::{generate_candidates, CandidateSet};
pub use heuristic::greedy_placement;
use heuristic::polish;
pub use model::{build_milp, PlacementMilp, ROW_FAMILIES};
pub use solve::{min_fbs_count, solve_exact, solve_instance, SolveOutcome};
pub use validate::validate_solution;

use serde::{Deserialize, Serialize};

use crate::channel::{self, Environment};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Smallest height of an FBS above a user it serves, m. Keeps the elevation
/// angle defined for a user straight below a candidate.
pub const MIN_CLEARANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementParams {
    pub h_min: f64,
    pub h_max: f64,
    /// Channels per FBS, i.e. the most users one FBS may serve.
    pub psi: usize,
    /// Backhaul rate of one FBS, Mbps.
    pub backhaul_rate: f64,
    /// Minimum elevation angle of a served user, degrees.
    pub theta_deg: f64,
    /// Expansion altitude of the loss linearization. `None` means the middle
    /// of the altitude band.
    pub h0: Option<f64>,
    pub candidate_spacing: f64,
    /// Wall-clock budget of one exact solve, seconds. `None` for no limit.
    pub time_limit: Option<f64>,
    /// Branch-and-bound node budget of one exact solve. Unlike the time
    /// limit it keeps truncated solves reproducible.
    pub node_limit: Option<usize>,
    pub big_m_factor: f64,
}

impl Default for PlacementParams {
    fn default() -> Self {
        PlacementParams {
            h_min: 110.0,
            h_max: 600.0,
            psi: 40,
            backhaul_rate: 100.0,
            theta_deg: 45.0,
            h0: None,
            candidate_spacing: 110.0,
            time_limit: None,
            node_limit: None,
            big_m_factor: 10.0,
        }
    }
}

impl PlacementParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h_min > 0.0
            && self.h_min <= self.h_max
            && self.h_max.is_finite()
            && self.psi > 0
            && self.backhaul_rate > 0.0
            && self.theta_deg > 0.0
            && self.theta_deg < 90.0
            && self.candidate_spacing > 0.0
            && self.big_m_factor >= 1.0
            && self.h0.map_or(true, |h| h > 0.0 && h.is_finite())
            && self.time_limit.map_or(true, |t| t >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "placement parameters out of range: {self:?}"
            )))
        }
    }

    pub fn h0(&self) -> f64 {
        self.h0.unwrap_or(0.5 * (self.h_min + self.h_max))
    }

    /// Horizontal coverage radius at the lowest altitude for a ground user.
    pub fn r_min(&self) -> f64 {
        self.h_min / self.theta_deg.to_radians().tan()
    }
}

/// Derived data of one candidate/user pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairData {
    /// Horizontal distance, m.
    pub r: f64,
    /// Lowest FBS altitude that keeps the user inside the coverage cone.
    pub cone: f64,
    /// Highest FBS altitude allowed by the path-loss gate.
    pub gate: f64,
    /// Linear excess-loss factor at the expansion altitude.
    pub w: f64,
    /// Constant part of the linearized squared distance, `r^2 - h0^2 - 2 h0 z`.
    pub lin0: f64,
}

/// Raw data of one placement problem, independent of the fleet size.
#[derive(Debug, Clone)]
pub struct PlacementInstance {
    pub candidates: Vec<(f64, f64)>,
    pub users: Vec<Point3>,
    pub demands: Vec<f64>,
    pub env: Environment,
    pub params: PlacementParams,
    pub h0: f64,
    /// `pairs[i][j]` for candidate `i`, user `j`.
    pub pairs: Vec<Vec<PairData>>,
}

impl PlacementInstance {
    pub fn new(
        candidates: &CandidateSet,
        users: &[Point3],
        demands: &[f64],
        env: &Environment,
        params: &PlacementParams,
    ) -> Result<Self> {
        env.validate()?;
        params.validate()?;
        if candidates.points.is_empty() {
            return Err(Error::InvalidInput("candidate set is empty".into()));
        }
        if users.len() != demands.len() {
            return Err(Error::InvalidInput(format!(
                "{} users but {} demands",
                users.len(),
                demands.len()
            )));
        }
        if let Some(d) = demands.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidInput(format!("demand {d} must be positive")));
        }
        let h0 = params.h0();
        let cot = 1.0 / params.theta_deg.to_radians().tan();
        let mut pairs = Vec::with_capacity(candidates.points.len());
        for &(cx, cy) in &candidates.points {
            let mut row = Vec::with_capacity(users.len());
            for u in users {
                let r = (cx - u.x).hypot(cy - u.y);
                let cone = u.z + (cot * r).max(MIN_CLEARANCE);
                let gate = channel::taylor_gate(r, h0, env)? + u.z - 0.5;
                // Elevation seen from the user at the expansion altitude; a
                // user above h0 is treated as straight below.
                let dz = (h0 - u.z).max(MIN_CLEARANCE);
                let theta = if r == 0.0 {
                    90.0
                } else {
                    dz.atan2(r).to_degrees()
                };
                let w = channel::excess_weight(theta, env)?;
                row.push(PairData {
                    r,
                    cone,
                    gate,
                    w,
                    lin0: r * r - h0 * h0 - 2.0 * h0 * u.z,
                });
            }
            pairs.push(row);
        }
        Ok(PlacementInstance {
            candidates: candidates.points.clone(),
            users: users.to_vec(),
            demands: demands.to_vec(),
            env: *env,
            params: *params,
            h0,
            pairs,
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Lowest and highest altitude at which candidate `i` may serve user `j`.
    pub fn altitude_window(&self, i: usize, j: usize) -> (f64, f64) {
        let p = &self.pairs[i][j];
        (p.cone.max(self.params.h_min), p.gate.min(self.params.h_max))
    }

    /// True if candidate `i` can serve user `j` on its own.
    pub fn eligible(&self, i: usize, j: usize) -> bool {
        let (lo, hi) = self.altitude_window(i, j);
        lo <= hi && self.demands[j] <= self.params.backhaul_rate
    }

    /// Linearized, normalized loss of pair `(i, j)` with the FBS at `h`.
    pub fn pair_cost(&self, i: usize, j: usize, h: f64) -> f64 {
        let p = &self.pairs[i][j];
        p.w * (p.lin0 + 2.0 * self.h0 * h).max(0.0) / (self.h0 * self.h0)
    }

    /// Best altitude and cost of candidate `i` serving exactly `users`, or
    /// `None` if that group violates any per-FBS limit.
    pub fn facility(&self, i: usize, users: &[usize]) -> Option<(f64, f64)> {
        if users.len() > self.params.psi {
            return None;
        }
        let load: f64 = users.iter().map(|&j| self.demands[j]).sum();
        if load > self.params.backhaul_rate {
            return None;
        }
        let mut lo = self.params.h_min;
        let mut hi = self.params.h_max;
        for &j in users {
            let (a, b) = self.altitude_window(i, j);
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if lo > hi {
            return None;
        }
        let cost = users.iter().map(|&j| self.pair_cost(i, j, lo)).sum();
        Some((lo, cost))
    }

    /// Builds a solution from an assignment `user -> candidate` and the set
    /// of open candidates. Altitudes are the lowest feasible ones.
    pub fn solution_from_assignment(
        &self,
        open: &[usize],
        assignment: &[usize],
    ) -> Option<PlacementSolution> {
        let mut selected = Vec::with_capacity(open.len());
        let mut objective = 0.0;
        let mut sorted = open.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != open.len() {
            return None;
        }
        for &i in &sorted {
            let group: Vec<usize> = (0..assignment.len())
                .filter(|&j| assignment[j] == i)
                .collect();
            let (h, c) = self.facility(i, &group)?;
            selected.push((i, h));
            objective += c;
        }
        if assignment.iter().any(|a| sorted.binary_search(a).is_err()) {
            return None;
        }
        let path_loss = assignment
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let h = selected
                    .iter()
                    .find(|s| s.0 == i)
                    .map(|s| s.1)
                    .unwrap_or(0.0);
                let (cx, cy) = self.candidates[i];
                channel::link_loss(&Point3::new(cx, cy, h), &self.users[j], &self.env)
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        Some(PlacementSolution {
            selected,
            assignment: assignment.to_vec(),
            path_loss,
            objective,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementSolution {
    /// Open candidates with their altitudes, sorted by candidate id.
    pub selected: Vec<(usize, f64)>,
    /// Candidate serving each user.
    pub assignment: Vec<usize>,
    /// Mean path loss of each user's link, dB.
    pub path_loss: Vec<f64>,
    /// Sum of the linearized normalized losses.
    pub objective: f64,
}

impl PlacementSolution {
    pub fn fbs_count(&self) -> usize {
        self.selected.len()
    }

    /// Hovering point of every open candidate, in `selected` order.
    pub fn positions(&self, inst: &PlacementInstance) -> Vec<Point3> {
        self.selected
            .iter()
            .map(|&(i, h)| {
                let (x, y) = inst.candidates[i];
                Point3::new(x, y, h)
            })
            .collect()
    }
}
