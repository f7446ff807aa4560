//! Fleet set management over an episode of snapshots.
//!
//! Snapshot 0 deploys the first placement for free. Every later snapshot
//! moves the users, re-solves the placement, routes every airborne FBS and
//! the base to the new hovering points, assigns FBSs with the padded
//! minimum-energy matching, staggers departures to keep the safety radius,
//! flies the window and settles the battery ledger.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Environment;
use crate::error::{Error, Result};
use crate::geometry::{BoxObstacle, Point3};
use crate::placement::{
    generate_candidates, min_fbs_count, CandidateSet, PlacementInstance, PlacementParams,
};
use crate::routing::{
    all_pairs, build_graph, detect_collisions, point_route_distance, reroute_around,
    stagger_departures, stagger_with_carryover, Movement, Route,
};
use crate::scenario::{
    generate_obstacles, snapshot_interval, spawn_users, step_random_waypoint, MobilityMix,
    ObstacleParams, Region, User, UserParams,
};
use crate::trajectory::{
    build_assignment, distance_threshold, edge_energy, energy_per_meter, solve_assignment,
    AirborneFbs, DestSlot, EnergyModel, OriginSlot, TransitionRoutes,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FleetParams {
    /// Cruise speed, m/s.
    pub v_fbs: f64,
    /// Smallest allowed separation between two airborne FBSs, m.
    pub safety_radius: f64,
    /// Spacing of obstacle edge points in the visibility graph, m.
    pub graph_spacing: f64,
    /// Base position; FBSs parked there are on the ground.
    pub base: [f64; 3],
    /// Charging power at the base, J/s. `None` charges a full battery in
    /// four snapshots.
    pub recharge_rate: Option<f64>,
    /// Fleet size. `None` sizes it from the first placement.
    pub size: Option<usize>,
    /// Margin on the first placement when sizing the fleet.
    pub safety_factor: f64,
}

impl Default for FleetParams {
    fn default() -> Self {
        FleetParams {
            v_fbs: 15.0,
            safety_radius: 5.0,
            graph_spacing: 10.0,
            base: [0.0, 0.0, 0.0],
            recharge_rate: None,
            size: None,
            safety_factor: 1.5,
        }
    }
}

/// Assignment edges a snapshot may forbid before giving up on a
/// conflict-free schedule.
const MAX_REASSIGNMENTS: usize = 64;

/// Everything one episode needs besides its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Transitions after the initial deployment.
    pub snapshots: usize,
    /// Snapshot interval, s. `None` derives it from the coverage radius and
    /// the mean user speed.
    pub dt: Option<f64>,
    pub region: Region,
    pub users: UserParams,
    pub mobility: MobilityMix,
    pub obstacles: ObstacleParams,
    pub channel: Environment,
    pub placement: PlacementParams,
    pub energy: EnergyModel,
    pub fleet: FleetParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            snapshots: 20,
            dt: None,
            region: Region::default(),
            users: UserParams::default(),
            mobility: MobilityMix::default(),
            obstacles: ObstacleParams::default(),
            channel: Environment::default(),
            placement: PlacementParams::default(),
            energy: EnergyModel::default(),
            fleet: FleetParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        self.users.validate()?;
        self.mobility.validate()?;
        self.obstacles.validate()?;
        self.channel.validate()?;
        self.placement.validate()?;
        self.energy.validate()?;
        let f = &self.fleet;
        let ok = self.snapshots >= 1
            && self.dt.map_or(true, |d| d > 0.0 && d.is_finite())
            && f.v_fbs > 0.0
            && f.safety_radius > 0.0
            && f.graph_spacing > 0.0
            && f.base.iter().all(|v| v.is_finite())
            && f.base[2] >= 0.0
            && self.region.contains(f.base[0], f.base[1])
            && f.recharge_rate.map_or(true, |r| r >= 0.0)
            && f.size.map_or(true, |s| s > 0)
            && f.safety_factor >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "simulation parameters out of range".into(),
            ))
        }
    }

    pub fn base(&self) -> Point3 {
        let b = self.fleet.base;
        Point3::new(b[0], b[1], b[2])
    }

    /// Snapshot interval, s.
    pub fn interval(&self) -> Result<f64> {
        match self.dt {
            Some(d) => Ok(d),
            None => snapshot_interval(self.placement.r_min(), &self.mobility),
        }
    }
}

/// The static world of one episode and the initial users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub base: Point3,
    pub obstacles: Vec<BoxObstacle>,
    pub users: Vec<User>,
    pub candidates: CandidateSet,
    /// Seed of the user mobility stream.
    pub mobility_seed: u64,
}

impl Scenario {
    pub fn generate(cfg: &SimConfig, seed: u64) -> Result<Scenario> {
        cfg.validate()?;
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let (s_obst, s_users, s_move) = (master.next_u64(), master.next_u64(), master.next_u64());
        let base = cfg.base();
        let obstacles = generate_obstacles(&cfg.region, &cfg.obstacles, &base, s_obst)?;
        let users = spawn_users(&cfg.region, &cfg.users, &cfg.mobility, s_users)?;
        let candidates = generate_candidates(&cfg.region, cfg.placement.candidate_spacing)?
            .without_footprints(&obstacles);
        Ok(Scenario {
            seed,
            base,
            obstacles,
            users,
            candidates,
            mobility_seed: s_move,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FbsStatus {
    Serving,
    InTransit,
    AtBase,
    Charging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fbs {
    pub id: usize,
    pub position: Point3,
    /// Remaining battery energy, J.
    pub energy: f64,
    pub capacity: f64,
    pub status: FbsStatus,
}

impl Fbs {
    pub fn is_parked(&self) -> bool {
        matches!(self.status, FbsStatus::AtBase | FbsStatus::Charging)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetState {
    pub fbs: Vec<Fbs>,
}

impl FleetState {
    pub fn new(size: usize, capacity: f64, base: Point3) -> FleetState {
        FleetState {
            fbs: (0..size)
                .map(|id| Fbs {
                    id,
                    position: base,
                    energy: capacity,
                    capacity,
                    status: FbsStatus::AtBase,
                })
                .collect(),
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.fbs.iter().map(|f| f.energy).sum()
    }

    pub fn count(&self, status: FbsStatus) -> usize {
        self.fbs.iter().filter(|f| f.status == status).count()
    }
}

/// Charges every parked FBS by `rate * dt`, capped at its capacity. Returns
/// the energy added.
pub fn apply_recharge(fleet: &mut FleetState, dt: f64, rate: f64) -> f64 {
    let mut added = 0.0;
    for f in fleet.fbs.iter_mut().filter(|f| f.is_parked()) {
        let next = (f.energy + rate * dt).min(f.capacity);
        added += next - f.energy;
        f.energy = next;
        f.status = if f.energy < f.capacity {
            FbsStatus::Charging
        } else {
            FbsStatus::AtBase
        };
    }
    added
}

/// One FBS leg flown during a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub fbs: usize,
    pub route: Route,
    /// Departure delay, s.
    pub offset: f64,
    /// Distance covered in this window, m.
    pub flown: f64,
    pub energy: f64,
    /// Airborne before departure, i.e. not leaving the base.
    pub present_before: bool,
    /// Heading to a hovering point rather than the base.
    pub present_after: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub index: usize,
    pub users: usize,
    /// Hovering points of the placement.
    pub required: Vec<Point3>,
    pub placement_objective: f64,
    /// FBS assigned to each hovering point.
    pub assigned: Vec<usize>,
    /// Hovering points whose FBS is still on its way at window end.
    pub unserved_points: usize,
    pub legs: Vec<Leg>,
    pub fleet: FleetState,
    pub distance_flown: f64,
    pub energy_spent: f64,
    pub energy_recharged: f64,
    pub total_demand: f64,
    /// Demand of users whose FBS hovers at its point by window end.
    pub served_demand: f64,
    pub reroutes: usize,
    /// Assignment edges forbidden to make the schedule conflict-free.
    pub reassignments: usize,
    /// Wall time of the assignment solves alone, s.
    pub solve_time: f64,
    pub graph_time: f64,
    pub placement_time: f64,
}

impl SnapshotRecord {
    pub fn fbs_count(&self) -> usize {
        self.required.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTimeline {
    pub seed: u64,
    pub dt: f64,
    pub fleet_size: usize,
    pub initial_energy: f64,
    /// Fleet right after the free initial deployment.
    pub initial_fleet: FleetState,
    pub initial_required: Vec<Point3>,
    pub snapshots: Vec<SnapshotRecord>,
    /// Reason the episode stopped early, if it did.
    pub aborted: Option<String>,
}

impl EpisodeTimeline {
    pub fn status(&self) -> Result<()> {
        match &self.aborted {
            Some(r) => Err(Error::EpisodeAborted(r.clone())),
            None => Ok(()),
        }
    }

    pub fn final_fleet(&self) -> &FleetState {
        self.snapshots
            .last()
            .map_or(&self.initial_fleet, |s| &s.fleet)
    }

    /// Initial energy plus recharges minus spending, against the final fleet.
    pub fn ledger_error(&self) -> f64 {
        let spent: f64 = self.snapshots.iter().map(|s| s.energy_spent).sum();
        let added: f64 = self.snapshots.iter().map(|s| s.energy_recharged).sum();
        (self.initial_energy - spent + added - self.final_fleet().total_energy()).abs()
    }
}

struct Placed {
    required: Vec<Point3>,
    objective: f64,
    /// Hovering point serving each user.
    user_point: Vec<usize>,
}

fn place(cfg: &SimConfig, sc: &Scenario, users: &[User]) -> Result<Placed> {
    let pos: Vec<Point3> = users.iter().map(|u| u.pos).collect();
    let dem: Vec<f64> = users.iter().map(|u| u.demand).collect();
    let inst = PlacementInstance::new(&sc.candidates, &pos, &dem, &cfg.channel, &cfg.placement)?;
    let (_, sol) = min_fbs_count(&inst)?;
    let user_point = sol
        .assignment
        .iter()
        .map(|i| sol.selected.iter().position(|s| s.0 == *i).unwrap())
        .collect();
    Ok(Placed {
        required: sol.positions(&inst),
        objective: sol.objective,
        user_point,
    })
}

/// Runs one episode. Configuration and scenario errors are returned as
/// `Err`; a run that cannot continue stops with `aborted` set and the
/// snapshots completed so far.
pub fn run_episode(sc: &Scenario, cfg: &SimConfig) -> Result<EpisodeTimeline> {
    cfg.validate()?;
    let dt = cfg.interval()?;
    let capacity = cfg.energy.capacity();
    let rate = cfg.fleet.recharge_rate.unwrap_or(capacity / (4.0 * dt));
    let first = match place(cfg, sc, &sc.users) {
        Ok(p) => p,
        Err(e) => {
            return Ok(EpisodeTimeline {
                seed: sc.seed,
                dt,
                fleet_size: 0,
                initial_energy: 0.0,
                initial_fleet: FleetState { fbs: vec![] },
                initial_required: vec![],
                snapshots: vec![],
                aborted: Some(format!("initial placement: {e}")),
            })
        }
    };
    let p0 = first.required.len();
    let size = cfg
        .fleet
        .size
        .unwrap_or(2 * (cfg.fleet.safety_factor * p0 as f64).ceil() as usize)
        .max(p0);
    let mut fleet = FleetState::new(size, capacity, sc.base);
    for (f, p) in fleet.fbs.iter_mut().zip(&first.required) {
        f.position = *p;
        f.status = FbsStatus::Serving;
    }
    let mut tl = EpisodeTimeline {
        seed: sc.seed,
        dt,
        fleet_size: size,
        initial_energy: fleet.total_energy(),
        initial_fleet: fleet.clone(),
        initial_required: first.required.clone(),
        snapshots: Vec::with_capacity(cfg.snapshots),
        aborted: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sc.mobility_seed);
    let mut users = sc.users.clone();
    // Target of each FBS still flying toward a point.
    let mut targets: Vec<Option<Point3>> = vec![None; size];
    for k in 1..=cfg.snapshots {
        match step(
            cfg,
            sc,
            dt,
            rate,
            k,
            &mut users,
            &mut fleet,
            &mut targets,
            &mut rng,
        ) {
            Ok(rec) => tl.snapshots.push(rec),
            Err(e) => {
                tl.aborted = Some(format!("snapshot {k}: {e}"));
                break;
            }
        }
    }
    Ok(tl)
}

#[allow(clippy::too_many_arguments)]
fn step(
    cfg: &SimConfig,
    sc: &Scenario,
    dt: f64,
    rate: f64,
    k: usize,
    users: &mut Vec<User>,
    fleet: &mut FleetState,
    targets: &mut [Option<Point3>],
    rng: &mut ChaCha8Rng,
) -> Result<SnapshotRecord> {
    let model = &cfg.energy;
    let v = cfg.fleet.v_fbs;
    let radius = cfg.fleet.safety_radius;
    let spacing = cfg.fleet.graph_spacing;
    let e1 = energy_per_meter(model);
    *users = step_random_waypoint(users, &cfg.region, &cfg.mobility, dt, rng)?;

    let t = Instant::now();
    let placed = place(cfg, sc, users)?;
    let placement_time = t.elapsed().as_secs_f64();
    let required = placed.required.clone();
    let r = required.len();

    // Everything off the ground is an origin; mid-flight FBSs are not bound
    // by the per-snapshot distance limit.
    let air: Vec<usize> = (0..fleet.fbs.len())
        .filter(|&i| !fleet.fbs[i].is_parked())
        .collect();
    let parked: Vec<(usize, f64)> = fleet
        .fbs
        .iter()
        .filter(|f| f.is_parked())
        .map(|f| (f.id, f.energy))
        .collect();
    let origins: Vec<Point3> = air.iter().map(|&i| fleet.fbs[i].position).collect();
    // Old targets stay in the graph so the way home through them exists.
    let mut dests = required.clone();
    dests.extend(air.iter().filter_map(|&i| targets[i]));

    let t = Instant::now();
    let graph = build_graph(&origins, &dests, &sc.base, &sc.obstacles, spacing)?;
    let reserve = graph.base_reserve();
    let mut sources = graph.origin_ids.clone();
    sources.push(graph.base_id);
    let mut sinks: Vec<usize> = graph.destination_ids[..r].to_vec();
    sinks.push(graph.base_id);
    let pm = all_pairs(&graph, &sources, &sinks);
    let graph_time = t.elapsed().as_secs_f64();

    let a = air.len();
    let routes = TransitionRoutes {
        field: (0..a).map(|o| pm.dist[o][..r].to_vec()).collect(),
        to_base: (0..a).map(|o| pm.dist[o][r]).collect(),
        from_base: pm.dist[a][..r].to_vec(),
        reserve: (0..r).map(|j| reserve[graph.destination_ids[j]]).collect(),
        base_z: sc.base.z,
    };
    let dist_th = distance_threshold(v, dt);
    let airborne: Vec<AirborneFbs> = air
        .iter()
        .map(|&i| AirborneFbs {
            id: i,
            position: fleet.fbs[i].position,
            energy: fleet.fbs[i].energy,
            in_transit: fleet.fbs[i].status == FbsStatus::InTransit,
        })
        .collect();
    let mut problem = build_assignment(&airborne, &parked, &required, &routes, model, dist_th);
    let n = problem.len();

    // One movement per real FBS that leaves or hovers in the field.
    struct Plan {
        fbs: usize,
        dest: Option<usize>,
        slot: (usize, usize),
        movement: Movement,
    }
    let mut solve_time = 0.0;
    let mut reassignments = 0;
    let (plans, assigned, reroutes, offsets) = loop {
        let t = Instant::now();
        let sol = solve_assignment(&problem)?;
        solve_time += t.elapsed().as_secs_f64();

        let mut plans: Vec<Plan> = Vec::new();
        let mut assigned = vec![usize::MAX; r];
        for (i, &j) in sol.perm.iter().enumerate() {
            let dest = match problem.destinations[j] {
                DestSlot::Field(q) => Some(q),
                DestSlot::Base => None,
            };
            let col = dest.unwrap_or(r);
            let (fbs, row, from_base) = match problem.origins[i] {
                OriginSlot::Phantom => continue,
                OriginSlot::Base(id) => {
                    if dest.is_none() {
                        continue;
                    }
                    (id, a, true)
                }
                OriginSlot::Airborne(id) => (id, i, false),
            };
            if let Some(q) = dest {
                assigned[q] = fbs;
            }
            let route = pm.routes[row][col]
                .clone()
                .ok_or(Error::Unreachable(sources[row], sinks[col]))?;
            let mut m = Movement::new(route);
            m.present_before = !from_base;
            m.present_after = dest.is_some();
            plans.push(Plan {
                fbs,
                dest,
                slot: (i, j),
                movement: m,
            });
        }

        // Detour around FBSs that hover in place for the whole window.
        let hovering: Vec<Point3> = plans
            .iter()
            .filter(|p| {
                p.movement.is_stationary() && p.movement.present_before && p.movement.present_after
            })
            .map(|p| p.movement.route.waypoints[0])
            .collect();
        let mut reroutes = 0;
        for p in plans.iter_mut().filter(|p| !p.movement.is_stationary()) {
            let near: Vec<Point3> = hovering
                .iter()
                .copied()
                .filter(|h| point_route_distance(h, &p.movement.route) < radius)
                .collect();
            if !near.is_empty() {
                p.movement.route =
                    reroute_around(&p.movement.route, &near, radius, &sc.obstacles, spacing)?;
                reroutes += 1;
            }
        }
        let movements: Vec<Movement> = plans.iter().map(|p| p.movement.clone()).collect();
        // Prefer every leg landing inside the window; then let delayed legs
        // run on into the next one; then forbid the blocking pairing and
        // match again.
        match stagger_departures(&movements, v, radius, dt) {
            Ok(o) => break (plans, assigned, reroutes, o),
            Err(Error::ScheduleOverrun(_)) => {}
            Err(e) => return Err(e),
        }
        let c =
            match stagger_with_carryover(&movements, v, radius, dt, &vec![true; movements.len()]) {
                Ok(o) => break (plans, assigned, reroutes, o),
                Err(c) => c,
            };
        reassignments += 1;
        if reassignments > MAX_REASSIGNMENTS {
            return Err(Error::ScheduleOverrun(format!(
                "FBSs {} and {} still conflict at t = {:.3} s after {MAX_REASSIGNMENTS} reassignments",
                plans[c.a].fbs, plans[c.b].fbs, c.time
            )));
        }
        let k = if movements[c.b].is_stationary() {
            c.a
        } else {
            c.b
        };
        let (i, j) = plans[k].slot;
        problem.cost[i * n + j] = f64::INFINITY;
    };

    let mut legs = Vec::with_capacity(plans.len());
    let mut spent = 0.0;
    let mut flown_total = 0.0;
    let mut arrived = vec![false; r];
    for (p, &off) in plans.iter().zip(&offsets) {
        let f = &mut fleet.fbs[p.fbs];
        let route = &p.movement.route;
        let start = route.waypoints[0];
        let end = *route.waypoints.last().unwrap();
        let flown = route.length.min(v * (dt - off).max(0.0));
        let leg_energy = edge_energy(route.length, end.z - start.z, model);
        let mut e = if route.length > 0.0 {
            leg_energy * (flown / route.length)
        } else {
            0.0
        };
        let done = flown >= route.length;
        if done {
            f.position = end;
            targets[p.fbs] = None;
            match p.dest {
                Some(q) => {
                    f.status = FbsStatus::Serving;
                    e += model.e_hover;
                    arrived[q] = true;
                }
                None => f.status = FbsStatus::AtBase,
            }
        } else {
            f.position = route.point_at(flown);
            f.status = FbsStatus::InTransit;
            targets[p.fbs] = Some(end);
        }
        if e > f.energy + 1e-6 {
            return Err(Error::EpisodeAborted(format!(
                "FBS {} ran out of energy",
                p.fbs
            )));
        }
        f.energy = (f.energy - e).max(0.0);
        if done {
            if let Some(q) = p.dest {
                let need = reserve[graph.destination_ids[q]] * e1 + model.energy_th;
                if f.energy + 1e-6 < need {
                    return Err(Error::EpisodeAborted(format!(
                        "FBS {} hovers below its return reserve after a detour",
                        p.fbs
                    )));
                }
            }
        }
        spent += e;
        flown_total += flown;
        legs.push(Leg {
            fbs: p.fbs,
            route: route.clone(),
            offset: off,
            flown,
            energy: e,
            present_before: p.movement.present_before,
            present_after: p.movement.present_after,
        });
    }

    // Only FBSs that were parked when the window opened charge.
    let mut was_parked = FleetState {
        fbs: parked
            .iter()
            .filter(|(id, _)| !plans.iter().any(|p| p.fbs == *id))
            .map(|(id, _)| fleet.fbs[*id].clone())
            .collect(),
    };
    let recharged = apply_recharge(&mut was_parked, dt, rate);
    for f in was_parked.fbs {
        let id = f.id;
        fleet.fbs[id] = f;
    }

    let total_demand = users.iter().map(|u| u.demand).sum();
    let served_demand = users
        .iter()
        .zip(&placed.user_point)
        .filter(|(_, &q)| arrived[q])
        .map(|(u, _)| u.demand)
        .sum();
    Ok(SnapshotRecord {
        index: k,
        users: users.len(),
        required,
        placement_objective: placed.objective,
        assigned,
        unserved_points: arrived.iter().filter(|a| !**a).count(),
        legs,
        fleet: fleet.clone(),
        distance_flown: flown_total,
        energy_spent: spent,
        energy_recharged: recharged,
        total_demand,
        served_demand,
        reroutes,
        reassignments,
        solve_time,
        graph_time,
        placement_time,
    })
}

/// Conflicts left among the legs of `rec`, recomputed from the recorded
/// offsets.
pub fn residual_conflicts(rec: &SnapshotRecord, v: f64, radius: f64, dt: f64) -> usize {
    let ms: Vec<Movement> = rec
        .legs
        .iter()
        .map(|l| Movement {
            route: l.route.clone(),
            offset: l.offset,
            present_before: l.present_before,
            present_after: l.present_after,
        })
        .collect();
    detect_collisions(&ms, v, radius, dt).len()
}
