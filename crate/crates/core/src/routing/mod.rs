//! Visibility graph over hovering points, the base and obstacle edge points;
//! shortest paths on it; collision checks between timed routes.

mod collision;

pub use collision::{
    detect_collisions, point_route_distance, reroute_around, stagger_departures,
    stagger_with_carryover, Conflict, Movement,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{discretize_edges, distance3, segment_intersects_box, BoxObstacle, Point3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub waypoints: Vec<Point3>,
    pub length: f64,
    pub origin: usize,
    pub destination: usize,
}

impl Route {
    pub fn from_points(waypoints: Vec<Point3>, origin: usize, destination: usize) -> Route {
        let length = waypoints.windows(2).map(|w| distance3(&w[0], &w[1])).sum();
        Route {
            waypoints,
            length,
            origin,
            destination,
        }
    }

    /// Point reached after flying `s` meters along the route.
    pub fn point_at(&self, s: f64) -> Point3 {
        let mut left = s.max(0.0);
        for w in self.waypoints.windows(2) {
            let seg = distance3(&w[0], &w[1]);
            if left <= seg {
                return if seg == 0.0 {
                    w[1]
                } else {
                    w[0].lerp(&w[1], left / seg)
                };
            }
            left -= seg;
        }
        *self.waypoints.last().expect("route has at least one point")
    }

    /// The part of the route from `s` meters onward.
    pub fn suffix(&self, s: f64) -> Route {
        let mut left = s.max(0.0);
        let mut pts = Vec::new();
        for (k, w) in self.waypoints.windows(2).enumerate() {
            let seg = distance3(&w[0], &w[1]);
            if left < seg {
                pts.push(w[0].lerp(&w[1], left / seg));
                pts.extend_from_slice(&self.waypoints[k + 1..]);
                return Route::from_points(pts, self.origin, self.destination);
            }
            left -= seg;
        }
        let end = *self.waypoints.last().expect("route has at least one point");
        Route::from_points(vec![end], self.origin, self.destination)
    }

    /// True if no segment passes through the interior of an obstacle.
    pub fn is_clear(&self, obstacles: &[BoxObstacle]) -> bool {
        self.waypoints.windows(2).all(|w| {
            w[0] == w[1]
                || !obstacles
                    .iter()
                    .any(|o| segment_intersects_box(&w[0], &w[1], o))
        })
    }
}

/// Complete graph over its vertices minus the pairs an obstacle separates.
/// Input points come first (deduplicated, in the order origins,
/// destinations, base), then obstacle edge points.
#[derive(Debug, Clone)]
pub struct VisibilityGraph {
    pub vertices: Vec<Point3>,
    pub origin_ids: Vec<usize>,
    pub destination_ids: Vec<usize>,
    pub base_id: usize,
    pub num_inputs: usize,
    pub obstacles: Vec<BoxObstacle>,
    /// Row-major edge weights; infinite where the segment is blocked.
    weights: Vec<f64>,
}

fn blocked(a: &Point3, b: &Point3, obstacles: &[BoxObstacle]) -> bool {
    let (lo, hi) = (
        Point3::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)),
        Point3::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)),
    );
    obstacles.iter().any(|o| {
        hi.x > o.min.x
            && lo.x < o.max.x
            && hi.y > o.min.y
            && lo.y < o.max.y
            && lo.z < o.max.z
            && segment_intersects_box(a, b, o)
    })
}

pub fn build_graph(
    origins: &[Point3],
    destinations: &[Point3],
    base: &Point3,
    obstacles: &[BoxObstacle],
    spacing: f64,
) -> Result<VisibilityGraph> {
    let mut vertices: Vec<Point3> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut intern = |p: &Point3, vertices: &mut Vec<Point3>| -> Result<usize> {
        if let Some(k) = obstacles.iter().position(|o| o.contains_interior(p)) {
            return Err(Error::PointInsideObstacle(obstacles[k].id));
        }
        Ok(*index.entry(p.key()).or_insert_with(|| {
            vertices.push(*p);
            vertices.len() - 1
        }))
    };
    let origin_ids = origins
        .iter()
        .map(|p| intern(p, &mut vertices))
        .collect::<Result<Vec<_>>>()?;
    let destination_ids = destinations
        .iter()
        .map(|p| intern(p, &mut vertices))
        .collect::<Result<Vec<_>>>()?;
    let base_id = intern(base, &mut vertices)?;
    let num_inputs = vertices.len();
    let mut seen: std::collections::HashSet<[u64; 3]> = vertices.iter().map(|p| p.key()).collect();
    for (k, o) in obstacles.iter().enumerate() {
        for p in discretize_edges(o, spacing)? {
            let inside_other = obstacles
                .iter()
                .enumerate()
                .any(|(l, q)| l != k && q.contains_interior(&p));
            if !inside_other && seen.insert(p.key()) {
                vertices.push(p);
            }
        }
    }
    Ok(VisibilityGraph::assemble(
        vertices,
        num_inputs,
        origin_ids,
        destination_ids,
        base_id,
        obstacles.to_vec(),
    ))
}

impl VisibilityGraph {
    /// Computes every edge weight over `vertices` against `obstacles`.
    pub(crate) fn assemble(
        vertices: Vec<Point3>,
        num_inputs: usize,
        origin_ids: Vec<usize>,
        destination_ids: Vec<usize>,
        base_id: usize,
        obstacles: Vec<BoxObstacle>,
    ) -> VisibilityGraph {
        let n = vertices.len();
        let mut weights = vec![f64::INFINITY; n * n];
        for u in 0..n {
            weights[u * n + u] = 0.0;
            for v in u + 1..n {
                if !blocked(&vertices[u], &vertices[v], &obstacles) {
                    let d = distance3(&vertices[u], &vertices[v]);
                    weights[u * n + v] = d;
                    weights[v * n + u] = d;
                }
            }
        }
        VisibilityGraph {
            vertices,
            origin_ids,
            destination_ids,
            base_id,
            num_inputs,
            obstacles,
            weights,
        }
    }
}

/// Single-source result: distances and predecessors.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub source: usize,
    pub dist: Vec<f64>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPathTree {
    pub fn route_to(&self, graph: &VisibilityGraph, t: usize) -> Result<Route> {
        if !self.dist[t].is_finite() {
            return Err(Error::Unreachable(self.source, t));
        }
        let ids = chain(&self.pred, t);
        let waypoints = ids.iter().map(|&v| graph.vertices[v]).collect();
        Ok(Route {
            waypoints,
            length: self.dist[t],
            origin: self.source,
            destination: t,
        })
    }
}

/// Vertex ids from the tree root to `v`.
fn chain(pred: &[Option<usize>], v: usize) -> Vec<usize> {
    let mut out = vec![v];
    let mut cur = v;
    while let Some(p) = pred[cur] {
        out.push(p);
        cur = p;
    }
    out.reverse();
    out
}

impl VisibilityGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[u * self.vertices.len() + v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.weight(u, v).is_finite()
    }

    /// Dijkstra over the vertices accepted by `allowed`, with an array
    /// priority queue. Among equal-length paths the lexicographically smallest
    /// vertex sequence wins.
    fn dijkstra_filtered(&self, s: usize, allowed: &dyn Fn(usize) -> bool) -> ShortestPathTree {
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        loop {
            let mut u = usize::MAX;
            for v in 0..n {
                if !done[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            let row = &self.weights[u * n..(u + 1) * n];
            for v in 0..n {
                if done[v] || !row[v].is_finite() || !allowed(v) {
                    continue;
                }
                let nd = dist[u] + row[v];
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some(u);
                } else if nd == dist[v] && pred[v] != Some(u) {
                    let mut via_u = chain(&pred, u);
                    via_u.push(v);
                    if via_u < chain(&pred, v) {
                        pred[v] = Some(u);
                    }
                }
            }
        }
        ShortestPathTree {
            source: s,
            dist,
            pred,
        }
    }

    pub fn dijkstra(&self, s: usize) -> ShortestPathTree {
        self.dijkstra_filtered(s, &|_| true)
    }

    /// Return-to-base distance from every vertex using only obstacle edge
    /// points as intermediate stops. It depends on the buildings and the base
    /// alone, so any later graph containing the same point can route home in
    /// at most this distance.
    pub fn base_reserve(&self) -> Vec<f64> {
        let ni = self.num_inputs;
        let base = self.base_id;
        let tree = self.dijkstra_filtered(base, &|v| v >= ni || v == base);
        let n = self.vertices.len();
        (0..n)
            .map(|j| {
                if j >= ni || j == base {
                    return tree.dist[j];
                }
                let mut best = self.weight(j, base);
                for e in ni..n {
                    let w = self.weight(j, e);
                    if w.is_finite() {
                        best = best.min(w + tree.dist[e]);
                    }
                }
                best
            })
            .collect()
    }
}

pub fn shortest_path(graph: &VisibilityGraph, s: usize, t: usize) -> Result<Route> {
    let n = graph.len();
    if s >= n || t >= n {
        return Err(Error::InvalidInput(format!(
            "vertex out of range: {s} or {t} of {n}"
        )));
    }
    graph.dijkstra(s).route_to(graph, t)
}

/// Shortest routes between vertex sets; `routes[a][b]` is `None` when
/// unreachable.
#[derive(Debug, Clone)]
pub struct PathMatrix {
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
    pub dist: Vec<Vec<f64>>,
    pub routes: Vec<Vec<Option<Route>>>,
}

pub fn all_pairs(graph: &VisibilityGraph, sources: &[usize], targets: &[usize]) -> PathMatrix {
    let mut dist = Vec::with_capacity(sources.len());
    let mut routes = Vec::with_capacity(sources.len());
    let mut cache: std::collections::HashMap<usize, ShortestPathTree> =
        std::collections::HashMap::new();
    for &s in sources {
        let tree = cache.entry(s).or_insert_with(|| graph.dijkstra(s));
        dist.push(targets.iter().map(|&t| tree.dist[t]).collect());
        routes.push(
            targets
                .iter()
                .map(|&t| tree.route_to(graph, t).ok())
                .collect(),
        );
    }
    PathMatrix {
        sources: sources.to_vec(),
        targets: targets.to_vec(),
        dist,
        routes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_space_pair() {
        let a = Point3::new(0.0, 0.0, 100.0);
        let b = Point3::new(300.0, 400.0, 100.0);
        let g = build_graph(&[a], &[b], &Point3::new(0.0, 0.0, 0.0), &[], 10.0).unwrap();
        assert!(g.has_edge(0, 1));
        let r = shortest_path(&g, 0, 1).unwrap();
        assert_eq!(r.waypoints, vec![a, b]);
        assert_eq!(r.length, 500.0);
        let same = shortest_path(&g, 0, 0).unwrap();
        assert_eq!(same.waypoints, vec![a]);
        assert_eq!(same.length, 0.0);
    }

    #[test]
    fn box_blocks_direct_edge() {
        let bx = BoxObstacle::new(0, 40.0, -20.0, 60.0, 20.0, 150.0).unwrap();
        let a = Point3::new(0.0, 0.0, 100.0);
        let b = Point3::new(100.0, 0.0, 100.0);
        let g = build_graph(&[a], &[b], &Point3::new(-50.0, 0.0, 0.0), &[bx], 10.0).unwrap();
        assert!(!g.has_edge(0, 1));
        assert!((g.num_inputs..g.len()).any(|e| g.has_edge(0, e)));
        let r = shortest_path(&g, 0, 1).unwrap();
        assert!(r.length > 100.0 && r.is_clear(&[bx]));
        let inside = Point3::new(50.0, 0.0, 10.0);
        assert_eq!(
            build_graph(&[inside], &[b], &Point3::new(-50.0, 0.0, 0.0), &[bx], 10.0).unwrap_err(),
            Error::PointInsideObstacle(0)
        );
    }

    #[test]
    fn suffix_and_point_at() {
        let r = Route::from_points(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(10.0, 0.0, 0.0),
                Point3::new(10.0, 10.0, 0.0),
            ],
            0,
            1,
        );
        assert_eq!(r.point_at(15.0), Point3::new(10.0, 5.0, 0.0));
        let s = r.suffix(5.0);
        assert_eq!(s.waypoints[0], Point3::new(5.0, 0.0, 0.0));
        assert_eq!(s.length, 15.0);
        assert_eq!(r.suffix(50.0).length, 0.0);
    }
}
