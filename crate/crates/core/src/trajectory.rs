//! Flight energy and the snapshot-to-snapshot FBS assignment.
//!
//! Origins are the airborne FBSs plus base slots, destinations are the new
//! hovering points plus base slots. Both sides are padded to the same size,
//! so the problem is a balanced assignment with forbidden edges, solved
//! exactly with the Hungarian method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyModel {
    /// Battery capacity, Ah.
    pub zeta: f64,
    /// Battery voltage, V.
    pub volt: f64,
    /// Flight distance of a full battery, m.
    pub d_total: f64,
    /// Takeoff mass, kg.
    pub mass: f64,
    pub g: f64,
    /// Energy to hover through one snapshot, J.
    pub e_hover: f64,
    /// Margin kept on top of the return-to-base energy, J.
    pub energy_th: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel {
            zeta: 15.0,
            volt: 11.1,
            d_total: 15000.0,
            mass: 8.0,
            g: 9.81,
            e_hover: 1000.0,
            energy_th: 0.0,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.zeta, self.volt, self.d_total, self.mass, self.g];
        if pos.iter().all(|v| *v > 0.0 && v.is_finite())
            && self.e_hover >= 0.0
            && self.energy_th >= 0.0
        {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "energy model out of range: {self:?}"
            )))
        }
    }

    /// Stored energy of a full battery, J.
    pub fn capacity(&self) -> f64 {
        self.zeta * self.volt * 3600.0
    }
}

/// Energy per metre of flight, J/m.
pub fn energy_per_meter(model: &EnergyModel) -> f64 {
    model.zeta * model.volt * 3600.0 / model.d_total
}

/// Energy of flying `route_length` metres with net climb `dz`. Descending
/// costs no potential energy.
pub fn edge_energy(route_length: f64, dz: f64, model: &EnergyModel) -> f64 {
    route_length * energy_per_meter(model) + model.mass * model.g * dz.max(0.0)
}

/// Farthest an FBS flies in one snapshot, m.
pub fn distance_threshold(v_fbs: f64, dt: f64) -> f64 {
    v_fbs * dt
}

pub fn path_energy(edge: f64, hover: f64) -> f64 {
    edge + hover
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OriginSlot {
    /// FBS hovering at a field position.
    Airborne(usize),
    /// FBS parked at the base.
    Base(usize),
    /// Padding slot with no FBS behind it.
    Phantom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DestSlot {
    /// Required hovering position, by index.
    Field(usize),
    Base,
}

/// An airborne FBS offered to the assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirborneFbs {
    pub id: usize,
    pub position: Point3,
    pub energy: f64,
    /// Still flying a leg that spans several snapshots; exempt from the
    /// distance threshold.
    pub in_transit: bool,
}

/// Everything `build_assignment` needs from the routing layer. Lengths are
/// infinite where no route exists.
#[derive(Debug, Clone)]
pub struct TransitionRoutes {
    /// `field[a][j]`: airborne FBS `a` to required position `j`.
    pub field: Vec<Vec<f64>>,
    /// `to_base[a]`: airborne FBS `a` to the base.
    pub to_base: Vec<f64>,
    /// `from_base[j]`: base to required position `j`.
    pub from_base: Vec<f64>,
    /// `reserve[j]`: return-to-base distance from required position `j`.
    pub reserve: Vec<f64>,
    pub base_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    pub origins: Vec<OriginSlot>,
    pub destinations: Vec<DestSlot>,
    /// Row-major `n x n`; infinite marks a forbidden edge.
    pub cost: Vec<f64>,
    /// Route length behind each edge, m.
    pub length: Vec<f64>,
}

impl AssignmentProblem {
    /// Problem over a plain square cost matrix; no slot metadata beyond
    /// indices.
    pub fn from_costs(cost: &[Vec<f64>]) -> Result<AssignmentProblem> {
        let n = cost.len();
        if cost.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("cost matrix is not square".into()));
        }
        if cost
            .iter()
            .flatten()
            .any(|c| c.is_nan() || *c == f64::NEG_INFINITY)
        {
            return Err(Error::InvalidInput("cost matrix has NaN or -inf".into()));
        }
        Ok(AssignmentProblem {
            origins: (0..n).map(OriginSlot::Airborne).collect(),
            destinations: (0..n).map(DestSlot::Field).collect(),
            cost: cost.iter().flatten().copied().collect(),
            length: vec![0.0; n * n],
        })
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.len() + j]
    }

    pub fn feasible(&self, i: usize, j: usize) -> bool {
        self.cost(i, j).is_finite()
    }
}

/// Builds the padded assignment between the current fleet and the required
/// positions.
///
/// Both sides have `2 max(airborne, required)` slots. Base origin slots go to
/// parked FBSs by descending energy, then id; the rest are phantoms that may
/// only stay at the base. A hovering FBS may move to a field position only
/// within `dist_th`; legs from or to the base, and FBSs already mid-flight,
/// are exempt and may span several snapshots. Every move into the field must
/// leave enough energy to hover once and still fly home.
pub fn build_assignment(
    airborne: &[AirborneFbs],
    parked: &[(usize, f64)],
    required: &[Point3],
    routes: &TransitionRoutes,
    model: &EnergyModel,
    dist_th: f64,
) -> AssignmentProblem {
    let a = airborne.len();
    let r = required.len();
    let n = 2 * a.max(r);
    let e1 = energy_per_meter(model);
    let mut parked = parked.to_vec();
    parked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let mut origins: Vec<OriginSlot> = airborne
        .iter()
        .map(|f| OriginSlot::Airborne(f.id))
        .collect();
    origins.extend(parked.iter().take(n - a).map(|p| OriginSlot::Base(p.0)));
    origins.resize(n, OriginSlot::Phantom);
    let mut destinations: Vec<DestSlot> = (0..r).map(DestSlot::Field).collect();
    destinations.resize(n, DestSlot::Base);

    let mut cost = vec![f64::INFINITY; n * n];
    let mut length = vec![0.0; n * n];
    for (i, o) in origins.iter().enumerate() {
        for (j, d) in destinations.iter().enumerate() {
            let (len, e, energy) = match (*o, *d) {
                (OriginSlot::Phantom, DestSlot::Base) => (0.0, 0.0, 0.0),
                (OriginSlot::Phantom, DestSlot::Field(_)) => continue,
                (OriginSlot::Base(_), DestSlot::Base) => (0.0, 0.0, 0.0),
                (OriginSlot::Base(_), DestSlot::Field(k)) => {
                    let len = routes.from_base[k];
                    let energy = parked[i - a].1;
                    (
                        len,
                        edge_energy(len, required[k].z - routes.base_z, model),
                        energy,
                    )
                }
                (OriginSlot::Airborne(_), DestSlot::Base) => {
                    let len = routes.to_base[i];
                    (len, edge_energy(len, 0.0, model), airborne[i].energy)
                }
                (OriginSlot::Airborne(_), DestSlot::Field(k)) => {
                    let len = routes.field[i][k];
                    if !airborne[i].in_transit && len > dist_th {
                        continue;
                    }
                    let dz = required[k].z - airborne[i].position.z;
                    (len, edge_energy(len, dz, model), airborne[i].energy)
                }
            };
            if !len.is_finite() {
                continue;
            }
            let need = match *d {
                DestSlot::Field(k) => e + model.e_hover + routes.reserve[k] * e1 + model.energy_th,
                DestSlot::Base => e,
            };
            // Small slack for the rounding of long sums of debits.
            if energy + 1e-6 >= need {
                cost[i * n + j] = e;
                length[i * n + j] = len;
            }
        }
    }
    AssignmentProblem {
        origins,
        destinations,
        cost,
        length,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSolution {
    /// Destination slot of each origin slot.
    pub perm: Vec<usize>,
    pub total_energy: f64,
}

/// Minimum-cost perfect matching on the feasible edges.
pub fn solve_assignment(problem: &AssignmentProblem) -> Result<AssignmentSolution> {
    let n = problem.len();
    if problem.destinations.len() != n || problem.cost.len() != n * n {
        return Err(Error::InvalidInput(
            "assignment problem is not balanced".into(),
        ));
    }
    let perm = hungarian(n, &problem.cost).ok_or_else(|| {
        Error::AssignmentInfeasible(format!("no perfect matching over {n} slots"))
    })?;
    let total_energy = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| problem.cost(i, j))
        .sum();
    Ok(AssignmentSolution { perm, total_energy })
}

/// Shortest augmenting path Hungarian method with row and column
/// potentials, O(n^3). Infinite costs are never used; `None` if some row
/// cannot be matched.
fn hungarian(n: usize, cost: &[f64]) -> Option<Vec<usize>> {
    const INF: f64 = f64::INFINITY;
    // 1-based with column 0 as the virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let c = cost[(i0 - 1) * n + (j - 1)];
                if c.is_finite() {
                    let cur = c - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return None;
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    Some(perm)
}
