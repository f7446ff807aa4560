//! Shared test oracles. Everything here recomputes the models from first
//! principles and does not call into the placement code.
#![allow(dead_code)]

use fbs_core::channel::Environment;
use fbs_core::geometry::Point3;
use fbs_core::placement::{CandidateSet, PlacementParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct SmallInstance {
    pub candidates: CandidateSet,
    pub users: Vec<Point3>,
    pub demands: Vec<f64>,
    pub p: usize,
    pub env: Environment,
    pub params: PlacementParams,
}

/// Random instance with up to 12 users, 6 candidates and a fleet of at most
/// 3. Users are dropped inside the top-altitude coverage cone of one of the
/// first `p` candidates, so many instances are feasible at their own size.
pub fn small_instance(rng: &mut ChaCha8Rng) -> SmallInstance {
    let nc = rng.gen_range(1..=6);
    let nu = rng.gen_range(1..=12);
    let cands: Vec<(f64, f64)> = (0..nc)
        .map(|_| (rng.gen_range(0.0..1500.0), rng.gen_range(0.0..1500.0)))
        .collect();
    let p = rng.gen_range(1..=3.min(nc));
    let pl_max = if rng.gen_bool(0.3) {
        rng.gen_range(86.0..92.0)
    } else {
        110.0
    };
    // A low loss budget shrinks the usable radius well inside the cone.
    let radius: f64 = if pl_max < 100.0 { 380.0 } else { 595.0 };
    let mut users = Vec::new();
    for _ in 0..nu {
        let (cx, cy) = cands[rng.gen_range(0..p)];
        let z = if rng.gen_bool(0.3) {
            rng.gen_range(0.0..150.0)
        } else {
            0.0
        };
        let reach = (radius - z).max(0.0) * rng.gen::<f64>().sqrt();
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        users.push(Point3::new(cx + reach * a.cos(), cy + reach * a.sin(), z));
    }
    let demands: Vec<f64> = (0..nu).map(|_| 6.0 * (1.0 - rng.gen::<f64>())).collect();
    let env = Environment {
        pl_max,
        ..Environment::default()
    };
    let params = PlacementParams {
        psi: rng.gen_range(4..=12),
        backhaul_rate: rng.gen_range(15.0..45.0),
        ..PlacementParams::default()
    };
    SmallInstance {
        candidates: CandidateSet { points: cands },
        users,
        demands,
        p,
        env,
        params,
    }
}

fn los(theta: f64, env: &Environment) -> f64 {
    1.0 / (1.0 + env.a * (-env.b * (theta - env.a)).exp())
}

/// Exhaustive placement optimum: every `p`-subset of candidates, every
/// split of the users among them, each FBS at the best altitude found by a
/// 1 m sweep over the band plus the exact constraint breakpoints.
pub fn brute_force(inst: &SmallInstance, p: usize) -> Option<f64> {
    let env = &inst.env;
    let prm = &inst.params;
    let nc = inst.candidates.points.len();
    let nu = inst.users.len();
    let h0 = 0.5 * (prm.h_min + prm.h_max);
    let k = 4.0 * std::f64::consts::PI * env.fc / env.c;
    let a_fs = k * k;
    let pl_lin = 10f64.powf(env.pl_max / 10.0);
    let cot = 1.0 / prm.theta_deg.to_radians().tan();

    // Altitudes to try: the 1 m grid plus every bound any pair can create.
    let mut grid: Vec<f64> = (0..)
        .map(|s| prm.h_min + s as f64)
        .take_while(|h| *h <= prm.h_max)
        .collect();
    grid.push(prm.h_max);

    // best[i][mask]: least cost of candidate i serving exactly `mask`.
    let full = 1usize << nu;
    let mut best = vec![vec![f64::INFINITY; full]; nc];
    for (i, &(cx, cy)) in inst.candidates.points.iter().enumerate() {
        let mut lo = vec![0.0; nu];
        let mut hi = vec![0.0; nu];
        let mut w = vec![0.0; nu];
        let mut c0 = vec![0.0; nu];
        let mut pts = grid.clone();
        for (j, u) in inst.users.iter().enumerate() {
            let r = (cx - u.x).hypot(cy - u.y);
            lo[j] = u.z + (cot * r).max(1.0);
            hi[j] = (pl_lin - a_fs * (r * r - h0 * h0)) / (2.0 * a_fs * h0) + u.z - 0.5;
            let dz0 = (h0 - u.z).max(1.0);
            let th = if r == 0.0 {
                90.0
            } else {
                dz0.atan2(r).to_degrees()
            };
            let pl = los(th, env);
            w[j] = 10f64.powf((pl * env.delta_los + (1.0 - pl) * env.delta_nlos) / 10.0);
            c0[j] = r * r - h0 * h0 - 2.0 * h0 * u.z;
            for b in [lo[j], hi[j]] {
                if (prm.h_min..=prm.h_max).contains(&b) {
                    pts.push(b);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for mask in 0..full {
            let members: Vec<usize> = (0..nu).filter(|j| mask >> j & 1 == 1).collect();
            if members.len() > prm.psi {
                continue;
            }
            let load: f64 = members.iter().map(|&j| inst.demands[j]).sum();
            if load > prm.backhaul_rate {
                continue;
            }
            for &h in &pts {
                if members.iter().any(|&j| h < lo[j] || h > hi[j]) {
                    continue;
                }
                let cost: f64 = members
                    .iter()
                    .map(|&j| w[j] * (c0[j] + 2.0 * h0 * h).max(0.0) / (h0 * h0))
                    .sum();
                if cost < best[i][mask] {
                    best[i][mask] = cost;
                }
            }
        }
    }

    let mut answer = f64::INFINITY;
    for subset in 0usize..(1 << nc) {
        if subset.count_ones() as usize != p {
            continue;
        }
        let chosen: Vec<usize> = (0..nc).filter(|i| subset >> i & 1 == 1).collect();
        // f[mask] = least cost of covering `mask` with the facilities so far.
        let mut f = vec![f64::INFINITY; full];
        f[0] = 0.0;
        for &i in &chosen {
            let mut g = vec![f64::INFINITY; full];
            for mask in 0..full {
                let mut sub = mask;
                loop {
                    let v = best[i][sub] + f[mask ^ sub];
                    if v < g[mask] {
                        g[mask] = v;
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mask;
                }
            }
            f = g;
        }
        answer = answer.min(f[full - 1]);
    }
    answer.is_finite().then_some(answer)
}

use fbs_core::geometry::{distance3, BoxObstacle};
use fbs_core::routing::{build_graph, Movement, Route, VisibilityGraph};

/// One random box with corner-only edge points and three random inputs, so
/// the graph stays small enough to enumerate.
pub fn random_scene(rng: &mut ChaCha8Rng) -> (VisibilityGraph, Vec<BoxObstacle>) {
    loop {
        let (x, y) = (rng.gen_range(200.0..400.0), rng.gen_range(200.0..400.0));
        let bx = BoxObstacle::new(
            0,
            x,
            y,
            x + rng.gen_range(20.0..150.0),
            y + rng.gen_range(20.0..150.0),
            rng.gen_range(40.0..160.0),
        )
        .unwrap();
        let mut pt = || {
            Point3::new(
                rng.gen_range(0.0..700.0),
                rng.gen_range(0.0..700.0),
                rng.gen_range(0.0..200.0),
            )
        };
        let (o, d, b) = (pt(), pt(), pt());
        if let Ok(g) = build_graph(&[o], &[d], &b, &[bx], 1e4) {
            return (g, vec![bx]);
        }
    }
}

pub fn path_length(g: &VisibilityGraph, ids: &[usize]) -> f64 {
    ids.windows(2).map(|w| g.weight(w[0], w[1])).sum()
}

/// Shortest simple path by exhaustive depth-first search, pruned only by
/// the best complete length found so far.
pub fn enumerate_paths(g: &VisibilityGraph, s: usize, t: usize) -> Option<(f64, Vec<usize>)> {
    fn go(
        g: &VisibilityGraph,
        t: usize,
        path: &mut Vec<usize>,
        len: f64,
        used: &mut [bool],
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let u = *path.last().unwrap();
        if u == t {
            if best.as_ref().map_or(true, |(b, _)| len < *b) {
                *best = Some((len, path.clone()));
            }
            return;
        }
        for v in 0..g.len() {
            if used[v] || !g.has_edge(u, v) {
                continue;
            }
            let l = len + g.weight(u, v);
            if best.as_ref().is_some_and(|(b, _)| l >= *b) {
                continue;
            }
            used[v] = true;
            path.push(v);
            go(g, t, path, l, used, best);
            path.pop();
            used[v] = false;
        }
    }
    let mut used = vec![false; g.len()];
    used[s] = true;
    let mut best = None;
    go(g, t, &mut vec![s], 0.0, &mut used, &mut best);
    best
}

/// Samples every segment and checks no sample lies more than 1e-7 m inside a
/// box.
pub fn sampled_clear(r: &Route, obstacles: &[BoxObstacle]) -> bool {
    // Waypoints sit on box edges, and an interpolated endpoint can land a
    // rounding error inside; only count samples deeper than that.
    const DEPTH: f64 = 1e-7;
    let deep = |o: &BoxObstacle, p: &Point3| {
        p.x > o.min.x + DEPTH
            && p.x < o.max.x - DEPTH
            && p.y > o.min.y + DEPTH
            && p.y < o.max.y - DEPTH
            && p.z > o.min.z + DEPTH
            && p.z < o.max.z - DEPTH
    };
    r.waypoints.windows(2).all(|w| {
        (0..=400).all(|k| {
            let p = w[0].lerp(&w[1], k as f64 / 400.0);
            !obstacles.iter().any(|o| deep(o, &p))
        })
    })
}

/// Position of a movement at time `t`, or `None` when it is not present.
pub fn position_at(m: &Movement, speed: f64, t: f64) -> Option<Point3> {
    let wp = &m.route.waypoints;
    if t < m.offset {
        return m.present_before.then_some(wp[0]);
    }
    let s = (t - m.offset) * speed;
    if s >= m.route.length {
        return m.present_after.then(|| *wp.last().unwrap());
    }
    Some(m.route.point_at(s))
}

/// Smallest pairwise distance over `[0, horizon]` sampled every 5 ms.
pub fn min_sampled_separation(ms: &[Movement], speed: f64, horizon: f64) -> f64 {
    min_separation_every(ms, speed, horizon, 0.005)
}

/// Smallest pairwise distance at the sample times `0, step, 2 step, ...`
/// and `horizon`. Never below the true minimum.
pub fn min_separation_every(ms: &[Movement], speed: f64, horizon: f64, step: f64) -> f64 {
    let steps = (horizon / step).ceil() as usize;
    let mut best = f64::INFINITY;
    for k in 0..=steps {
        let t = (k as f64 * step).min(horizon);
        let pos: Vec<Option<Point3>> = ms.iter().map(|m| position_at(m, speed, t)).collect();
        for a in 0..pos.len() {
            for b in a + 1..pos.len() {
                if let (Some(p), Some(q)) = (pos[a], pos[b]) {
                    best = best.min(distance3(&p, &q));
                }
            }
        }
    }
    best
}

/// Shortest path in the plane around one rectangle: visibility graph over
/// the four corners with an exact segment test, independent of the library.
pub fn planar_wrap(s: (f64, f64), t: (f64, f64), rect: (f64, f64, f64, f64)) -> f64 {
    let (x0, y0, x1, y1) = rect;
    let pts = [s, t, (x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    let crosses = |a: (f64, f64), b: (f64, f64)| {
        // Sample the open segment densely; the rectangle is axis aligned.
        (1..2000).any(|k| {
            let u = k as f64 / 2000.0;
            let (x, y) = (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1));
            x > x0 + 1e-9 && x < x1 - 1e-9 && y > y0 + 1e-9 && y < y1 - 1e-9
        })
    };
    let n = pts.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !done[v])
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
            .unwrap();
        done[u] = true;
        for v in 0..n {
            if !done[v] && !crosses(pts[u], pts[v]) {
                let d = dist[u] + (pts[u].0 - pts[v].0).hypot(pts[u].1 - pts[v].1);
                dist[v] = dist[v].min(d);
            }
        }
    }
    dist[1]
}

/// Exhaustive minimum over all permutations, skipping forbidden edges.
pub fn brute_assignment(cost: &[Vec<f64>]) -> Option<f64> {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut Option<f64>) {
        if row == cost.len() {
            if best.map_or(true, |b| acc < b) {
                *best = Some(acc);
            }
            return;
        }
        for j in 0..cost.len() {
            if !used[j] && cost[row][j].is_finite() {
                used[j] = true;
                go(cost, row + 1, used, acc + cost[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = None;
    go(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
    best
}

use fbs_core::simulation::{
    residual_conflicts, EpisodeTimeline, FbsStatus, FleetState, Scenario, SimConfig,
};
use fbs_core::trajectory::energy_per_meter;

fn leg_movements(rec: &fbs_core::simulation::SnapshotRecord) -> Vec<Movement> {
    rec.legs
        .iter()
        .map(|l| Movement {
            route: l.route.clone(),
            offset: l.offset,
            present_before: l.present_before,
            present_after: l.present_after,
        })
        .collect()
}

/// Every invariant violation of a timeline, finished or aborted. `step` is
/// the sampling period of the brute-force separation check, s.
pub fn episode_violations(
    cfg: &SimConfig,
    sc: &Scenario,
    tl: &EpisodeTimeline,
    step: f64,
) -> Vec<String> {
    let mut bad = Vec::new();
    let cap = cfg.energy.capacity();
    let e1 = energy_per_meter(&cfg.energy);
    let v = cfg.fleet.v_fbs;
    let radius = cfg.fleet.safety_radius;
    if tl.ledger_error() >= 1e-6 {
        bad.push(format!("ledger error {}", tl.ledger_error()));
    }
    let mut prev: &FleetState = &tl.initial_fleet;
    for rec in &tl.snapshots {
        let k = rec.index;
        if rec.fleet.fbs.len() != tl.fleet_size {
            bad.push(format!("s{k}: fleet size {}", rec.fleet.fbs.len()));
        }
        for f in &rec.fleet.fbs {
            if !(f.energy >= 0.0 && f.energy <= cap + 1e-9) {
                bad.push(format!("s{k}: FBS {} energy {}", f.id, f.energy));
            }
            // The straight line is a lower bound on any way home.
            if f.status == FbsStatus::Serving
                && f.energy + 1e-6 < distance3(&f.position, &sc.base) * e1
            {
                bad.push(format!("s{k}: FBS {} cannot get home", f.id));
            }
            if f.is_parked() && f.position != sc.base {
                bad.push(format!("s{k}: parked FBS {} away from base", f.id));
            }
        }
        // One leg per FBS, one FBS per point, and every FBS that was in the
        // air got a leg.
        let mut ids: Vec<usize> = rec.legs.iter().map(|l| l.fbs).collect();
        ids.sort();
        let n = ids.len();
        ids.dedup();
        if ids.len() != n {
            bad.push(format!("s{k}: an FBS flies two legs"));
        }
        let mut pts: Vec<usize> = rec
            .assigned
            .iter()
            .copied()
            .filter(|&a| a != usize::MAX)
            .collect();
        pts.sort();
        let n = pts.len();
        pts.dedup();
        if pts.len() != n {
            bad.push(format!("s{k}: an FBS holds two points"));
        }
        for f in prev.fbs.iter().filter(|f| !f.is_parked()) {
            if ids.binary_search(&f.id).is_err() {
                bad.push(format!(
                    "s{k}: airborne FBS {} left out of the assignment",
                    f.id
                ));
            }
        }
        if residual_conflicts(rec, v, radius, tl.dt) != 0 {
            bad.push(format!("s{k}: conflicts left after staggering"));
        }
        let sep = min_separation_every(&leg_movements(rec), v, tl.dt, step);
        if sep < radius - 1e-6 {
            bad.push(format!("s{k}: sampled separation {sep} below {radius}"));
        }
        for leg in &rec.legs {
            if !leg.route.is_clear(&sc.obstacles) || !sampled_clear(&leg.route, &sc.obstacles) {
                bad.push(format!("s{k}: FBS {} route enters an obstacle", leg.fbs));
            }
            if leg.flown > leg.route.length + 1e-9 || leg.offset + leg.flown / v > tl.dt + 1e-6 {
                bad.push(format!("s{k}: FBS {} leg overruns the window", leg.fbs));
            }
        }
        if rec.served_demand > rec.total_demand + 1e-9 {
            bad.push(format!("s{k}: served more than demanded"));
        }
        prev = &rec.fleet;
    }
    bad
}
