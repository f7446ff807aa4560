//! Timed routes, pairwise closest approach, and departure staggering.
//!
//! A movement waits at its first waypoint until its departure offset, flies
//! the route at constant speed, then stays at the last waypoint. Whether it
//! is physically present while waiting or after arriving is explicit, so that
//! an FBS parked on the ground at the base does not block anything.

use super::{Route, VisibilityGraph};
use crate::error::{Error, Result};
use crate::geometry::{discretize_edges, distance3, BoxObstacle, Point3};

#[derive(Debug, Clone, PartialEq)]
pub struct Movement {
    pub route: Route,
    /// Departure delay from the window start, s.
    pub offset: f64,
    pub present_before: bool,
    pub present_after: bool,
}

impl Movement {
    pub fn new(route: Route) -> Movement {
        Movement {
            route,
            offset: 0.0,
            present_before: true,
            present_after: true,
        }
    }

    pub fn hover(at: Point3) -> Movement {
        Movement::new(Route::from_points(vec![at], 0, 0))
    }

    pub fn is_stationary(&self) -> bool {
        self.route.length == 0.0
    }

    /// Linear pieces `(t0, t1, p0, p1, present)` covering `[0, horizon]`.
    fn pieces(&self, speed: f64, horizon: f64) -> Vec<(f64, f64, Point3, Point3, bool)> {
        let wp = &self.route.waypoints;
        let mut out = Vec::new();
        let mut t = self.offset.max(0.0);
        out.push((0.0, t, wp[0], wp[0], self.present_before));
        for w in wp.windows(2) {
            let dt = distance3(&w[0], &w[1]) / speed;
            if dt > 0.0 {
                out.push((t, t + dt, w[0], w[1], true));
                t += dt;
            }
        }
        let last = *wp.last().unwrap();
        out.push((t, f64::INFINITY, last, last, self.present_after));
        // Clip to the horizon, interpolating the piece that crosses it.
        let mut clipped = Vec::with_capacity(out.len());
        for (t0, t1, p0, p1, on) in out {
            if t0 >= horizon || t1 <= t0 {
                continue;
            }
            if t1 > horizon {
                let f = if t1.is_finite() {
                    (horizon - t0) / (t1 - t0)
                } else {
                    0.0
                };
                clipped.push((t0, horizon, p0, p0.lerp(&p1, f), on));
            } else {
                clipped.push((t0, t1, p0, p1, on));
            }
        }
        clipped
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conflict {
    pub a: usize,
    pub b: usize,
    /// Time of closest approach, s.
    pub time: f64,
    pub distance: f64,
    /// First and last instant the pair is closer than the safety radius.
    pub window: (f64, f64),
}

fn sub(p: &Point3, q: &Point3) -> [f64; 3] {
    [p.x - q.x, p.y - q.y, p.z - q.z]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn pair_conflict(
    pa: &[(f64, f64, Point3, Point3, bool)],
    pb: &[(f64, f64, Point3, Point3, bool)],
    radius: f64,
) -> Option<(f64, f64, (f64, f64))> {
    let at = |p: &(f64, f64, Point3, Point3, bool), t: f64| {
        if p.1 > p.0 {
            p.2.lerp(&p.3, (t - p.0) / (p.1 - p.0))
        } else {
            p.2
        }
    };
    let (mut i, mut j) = (0, 0);
    let mut best: Option<(f64, f64)> = None;
    let mut window = (f64::INFINITY, f64::NEG_INFINITY);
    while i < pa.len() && j < pb.len() {
        let s = pa[i].0.max(pb[j].0);
        let e = pa[i].1.min(pb[j].1);
        if e > s && pa[i].4 && pb[j].4 {
            let r0 = sub(&at(&pa[i], s), &at(&pb[j], s));
            let r1 = sub(&at(&pa[i], e), &at(&pb[j], e));
            let d = [r1[0] - r0[0], r1[1] - r0[1], r1[2] - r0[2]];
            let dd = dot(&d, &d);
            let u = if dd > 0.0 {
                (-dot(&r0, &d) / dd).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let m = [r0[0] + d[0] * u, r0[1] + d[1] * u, r0[2] + d[2] * u];
            let dist = dot(&m, &m).sqrt();
            let t = s + u * (e - s);
            if best.map_or(true, |(bd, _)| dist < bd) {
                best = Some((dist, t));
            }
            if dist < radius {
                let (u0, u1) = if dd > 0.0 {
                    let bq = dot(&r0, &d);
                    let c = dot(&r0, &r0) - radius * radius;
                    let disc = (bq * bq - dd * c).max(0.0).sqrt();
                    (((-bq - disc) / dd).max(0.0), ((-bq + disc) / dd).min(1.0))
                } else {
                    (0.0, 1.0)
                };
                window.0 = window.0.min(s + u0 * (e - s));
                window.1 = window.1.max(s + u1 * (e - s));
            }
        }
        if pa[i].1 <= pb[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    let (dist, t) = best?;
    (dist < radius).then_some((dist, t, window))
}

/// Every pair of movements that comes closer than `radius` within
/// `[0, horizon]`, ordered by the start of the conflict window.
pub fn detect_collisions(
    movements: &[Movement],
    speed: f64,
    radius: f64,
    horizon: f64,
) -> Vec<Conflict> {
    let pieces: Vec<_> = movements.iter().map(|m| m.pieces(speed, horizon)).collect();
    let mut out = Vec::new();
    for a in 0..movements.len() {
        for b in a + 1..movements.len() {
            if let Some((distance, time, window)) = pair_conflict(&pieces[a], &pieces[b], radius) {
                out.push(Conflict {
                    a,
                    b,
                    time,
                    distance,
                    window,
                });
            }
        }
    }
    out.sort_by(|x, y| {
        x.window
            .0
            .total_cmp(&y.window.0)
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });
    out
}

/// Delay added on top of a conflict window, s.
pub const STAGGER_EPS: f64 = 1e-3;

/// Departure offsets that remove every conflict.
///
/// Conflicts are taken in time order. The higher-indexed movement is delayed
/// by the conflict window length plus [`STAGGER_EPS`]; if that would make it
/// miss the window, the lower-indexed one is delayed instead. A movement that
/// fits in one window (`length / speed <= window`) must still arrive by
/// `window`; a longer one only has to depart before `window`. Stationary
/// movements are never delayed.
pub fn stagger_departures(
    movements: &[Movement],
    speed: f64,
    radius: f64,
    window: f64,
) -> Result<Vec<f64>> {
    stagger_with_carryover(movements, speed, radius, window, &vec![false; movements.len()]).map_err(|c| {
        Error::ScheduleOverrun(format!(
            "movements {} and {} conflict at t = {:.3} s and neither can be delayed within the window",
            c.a, c.b, c.time
        ))
    })
}

/// [`stagger_departures`] where each movement with `carry[k]` set may
/// finish in a later window, so it only has to depart before `window`. On
/// failure returns the conflict that could not be resolved.
pub fn stagger_with_carryover(
    movements: &[Movement],
    speed: f64,
    radius: f64,
    window: f64,
    carry: &[bool],
) -> std::result::Result<Vec<f64>, Conflict> {
    assert_eq!(carry.len(), movements.len(), "one carry flag per movement");
    let mut ms = movements.to_vec();
    let fits = |k: usize, m: &Movement, off: f64| {
        let fly = m.route.length / speed;
        if fly <= window + 1e-9 && !carry[k] {
            off + fly <= window + 1e-9
        } else {
            off < window
        }
    };
    let cap = 200 * (ms.len() + 1);
    let mut last = None;
    for _ in 0..cap {
        let conflicts = detect_collisions(&ms, speed, radius, window);
        let Some(c) = conflicts.into_iter().next() else {
            return Ok(ms.iter().map(|m| m.offset).collect());
        };
        let shift = (c.window.1 - c.window.0) + STAGGER_EPS;
        let movable = [c.b, c.a].into_iter().find(|&k| {
            let next = ms[k].offset + shift;
            !ms[k].is_stationary() && fits(k, &ms[k], next)
        });
        match movable {
            Some(k) => ms[k].offset += shift,
            None => return Err(c),
        }
        last = Some(c);
    }
    Err(last.expect("loop ran at least once"))
}

/// Closest distance between `p` and any point of `route`.
pub fn point_route_distance(p: &Point3, route: &Route) -> f64 {
    let wp = &route.waypoints;
    if wp.len() == 1 {
        return distance3(p, &wp[0]);
    }
    wp.windows(2)
        .map(|w| {
            let d = sub(&w[1], &w[0]);
            let dd = dot(&d, &d);
            let u = if dd > 0.0 {
                (dot(&sub(p, &w[0]), &d) / dd).clamp(0.0, 1.0)
            } else {
                0.0
            };
            distance3(p, &w[0].lerp(&w[1], u))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Replans `route` so it keeps at least `radius` from each point in
/// `keepouts`, treating every such point as a pillar from the ground up to
/// `radius` above it. Only buildings near the original route contribute
/// detour vertices; all of them still block.
pub fn reroute_around(
    route: &Route,
    keepouts: &[Point3],
    radius: f64,
    obstacles: &[BoxObstacle],
    spacing: f64,
) -> Result<Route> {
    let half = radius + 1.0;
    let mut blocking = obstacles.to_vec();
    for (k, p) in keepouts.iter().enumerate() {
        blocking.push(BoxObstacle::new(
            usize::MAX - k,
            p.x - half,
            p.y - half,
            p.x + half,
            p.y + half,
            p.z + half,
        )?);
    }
    let pad = 4.0 * half + 50.0;
    let wp = &route.waypoints;
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in wp.iter().chain(keepouts) {
        x0 = x0.min(p.x - pad);
        y0 = y0.min(p.y - pad);
        x1 = x1.max(p.x + pad);
        y1 = y1.max(p.y + pad);
    }
    let start = wp[0];
    let end = *wp.last().unwrap();
    let mut pts = vec![start];
    if end.key() != start.key() {
        pts.push(end);
    }
    let num_inputs = pts.len();
    let mut seen: std::collections::HashSet<[u64; 3]> = pts.iter().map(|p| p.key()).collect();
    for (k, o) in blocking.iter().enumerate() {
        let near = o.max.x > x0 && o.min.x < x1 && o.max.y > y0 && o.min.y < y1;
        if !near {
            continue;
        }
        let step = if k >= obstacles.len() {
            spacing.min(half)
        } else {
            spacing
        };
        for p in discretize_edges(o, step)? {
            let buried = blocking
                .iter()
                .enumerate()
                .any(|(l, q)| l != k && q.contains_interior(&p));
            if !buried && seen.insert(p.key()) {
                pts.push(p);
            }
        }
    }
    if let Some(k) = blocking
        .iter()
        .position(|o| o.contains_interior(&start) || o.contains_interior(&end))
    {
        return Err(Error::PointInsideObstacle(blocking[k].id));
    }
    let graph =
        VisibilityGraph::assemble(pts, num_inputs, vec![0], vec![num_inputs - 1], 0, blocking);
    let tree = graph.dijkstra(0);
    let mut r = tree.route_to(&graph, num_inputs - 1)?;
    r.origin = route.origin;
    r.destination = route.destination;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(a: Point3, b: Point3) -> Movement {
        Movement::new(Route::from_points(vec![a, b], 0, 1))
    }

    #[test]
    fn parallel_routes_never_meet() {
        let m = [
            line(
                Point3::new(0.0, 0.0, 100.0),
                Point3::new(1000.0, 0.0, 100.0),
            ),
            line(
                Point3::new(0.0, 500.0, 100.0),
                Point3::new(1000.0, 500.0, 100.0),
            ),
        ];
        assert!(detect_collisions(&m, 15.0, 10.0, 100.0).is_empty());
    }

    #[test]
    fn crossing_routes_meet_and_stagger_apart() {
        let m = [
            line(
                Point3::new(0.0, 150.0, 100.0),
                Point3::new(300.0, 150.0, 100.0),
            ),
            line(
                Point3::new(150.0, 0.0, 100.0),
                Point3::new(150.0, 300.0, 100.0),
            ),
        ];
        let c = detect_collisions(&m, 15.0, 10.0, 40.0);
        assert_eq!(c.len(), 1);
        assert!((c[0].time - 10.0).abs() < 1e-9);
        assert!(c[0].distance < 1e-9);
        // |r(t)| = 15 sqrt(2) |t - 10| < 10
        let half = 10.0 / (15.0 * 2f64.sqrt());
        assert!((c[0].window.0 - (10.0 - half)).abs() < 1e-9);
        assert!((c[0].window.1 - (10.0 + half)).abs() < 1e-9);

        let mut shifted = m.clone();
        shifted[1].offset = 2.0 * 10.0 / 15.0;
        assert!(detect_collisions(&shifted, 15.0, 10.0, 60.0).is_empty());

        let off = stagger_departures(&m, 15.0, 10.0, 40.0).unwrap();
        assert_eq!(off[0], 0.0);
        assert!((off[1] - (2.0 * half + STAGGER_EPS)).abs() < 1e-9);
    }

    #[test]
    fn hover_blocks_passing_route() {
        let m = [
            Movement::hover(Point3::new(150.0, 0.0, 100.0)),
            line(Point3::new(0.0, 0.0, 100.0), Point3::new(300.0, 0.0, 100.0)),
        ];
        assert_eq!(detect_collisions(&m, 15.0, 5.0, 30.0).len(), 1);
        assert!(stagger_departures(&m, 15.0, 5.0, 30.0).is_err());
        let r = reroute_around(&m[1].route, &[m[0].route.waypoints[0]], 5.0, &[], 10.0).unwrap();
        assert!(point_route_distance(&Point3::new(150.0, 0.0, 100.0), &r) >= 5.0);
        assert!(r.length < 320.0);
    }

    #[test]
    fn grounded_fbs_are_absent() {
        let base = Point3::new(0.0, 0.0, 0.0);
        let mut a = line(base, Point3::new(0.0, 0.0, 200.0));
        a.present_before = false;
        let mut b = Movement::hover(base);
        b.present_before = false;
        b.present_after = false;
        assert!(detect_collisions(&[a, b], 15.0, 5.0, 30.0).is_empty());
    }
}
