//! Points, box obstacles, segment/box intersection and obstacle edge sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn horizontal_distance(&self, other: &Point3) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point3, t: f64) -> Point3 {
        Point3::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
            self.z + (other.z - self.z) * t,
        )
    }

    fn axis(&self, k: usize) -> f64 {
        match k {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    /// Bitwise key, used to deduplicate identical points.
    pub fn key(&self) -> [u64; 3] {
        [self.x.to_bits(), self.y.to_bits(), self.z.to_bits()]
    }
}

pub fn distance3(p: &Point3, q: &Point3) -> f64 {
    let (dx, dy, dz) = (p.x - q.x, p.y - q.y, p.z - q.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Axis-aligned building standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxObstacle {
    pub id: usize,
    pub min: Point3,
    pub max: Point3,
}

impl BoxObstacle {
    /// Builds a box from its footprint and height. The base sits at z = 0.
    pub fn new(id: usize, x0: f64, y0: f64, x1: f64, y1: f64, height: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1 && height > 0.0) {
            return Err(Error::InvalidInput(format!(
                "obstacle {id}: degenerate box ({x0},{y0})-({x1},{y1}) height {height}"
            )));
        }
        Ok(BoxObstacle {
            id,
            min: Point3::new(x0, y0, 0.0),
            max: Point3::new(x1, y1, height),
        })
    }

    pub fn height(&self) -> f64 {
        self.max.z
    }

    /// True if `p` lies strictly inside the box.
    pub fn contains_interior(&self, p: &Point3) -> bool {
        (0..3).all(|k| p.axis(k) > self.min.axis(k) && p.axis(k) < self.max.axis(k))
    }

    /// True if the horizontal footprint strictly contains `(x, y)`.
    pub fn footprint_contains(&self, x: f64, y: f64) -> bool {
        x > self.min.x && x < self.max.x && y > self.min.y && y < self.max.y
    }

    /// The 4 vertical edges followed by the 4 top edges.
    pub fn edges(&self) -> [(Point3, Point3); 8] {
        let (a, b) = (self.min, self.max);
        let c = [(a.x, a.y), (b.x, a.y), (b.x, b.y), (a.x, b.y)];
        let v = |k: usize| {
            (
                Point3::new(c[k].0, c[k].1, 0.0),
                Point3::new(c[k].0, c[k].1, b.z),
            )
        };
        let t = |k: usize| {
            let l = (k + 1) % 4;
            (
                Point3::new(c[k].0, c[k].1, b.z),
                Point3::new(c[l].0, c[l].1, b.z),
            )
        };
        [v(0), v(1), v(2), v(3), t(0), t(1), t(2), t(3)]
    }
}

/// Overlap (in meters along the segment) below which a contact counts as
/// touching rather than passing through.
const GRAZE: f64 = 1e-7;

/// True iff the open segment `(a, b)` passes through the open interior of
/// `bx`. Running along a face or an edge, or touching a vertex, is allowed.
pub fn segment_intersects_box(a: &Point3, b: &Point3, bx: &BoxObstacle) -> bool {
    let len = distance3(a, b);
    if len == 0.0 {
        return bx.contains_interior(a);
    }
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for k in 0..3 {
        let (lo, hi) = (bx.min.axis(k), bx.max.axis(k));
        let (p, d) = (a.axis(k), b.axis(k) - a.axis(k));
        if d == 0.0 {
            if p <= lo || p >= hi {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo - p) / d, (hi - p) / d);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if (t1 - t0) * len <= GRAZE {
            return false;
        }
    }
    (t1 - t0) * len > GRAZE
}

/// Samples the 4 vertical and 4 top edges of `bx` with at most `spacing`
/// between neighbours. Corners are always included and appear once.
pub fn discretize_edges(bx: &BoxObstacle, spacing: f64) -> Result<Vec<Point3>> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidInput(format!(
            "edge spacing must be positive, got {spacing}"
        )));
    }
    let mut out: Vec<Point3> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (p, q) in bx.edges() {
        let len = distance3(&p, &q);
        let steps = ((len / spacing).ceil() as usize).max(1);
        for s in 0..=steps {
            let pt = if s == steps {
                q
            } else {
                p.lerp(&q, s as f64 / steps as f64)
            };
            if seen.insert(pt.key()) {
                out.push(pt);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BoxObstacle {
        BoxObstacle::new(0, 0.0, 0.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn distances() {
        let o = Point3::new(0.0, 0.0, 0.0);
        assert_eq!(distance3(&o, &o), 0.0);
        assert_eq!(distance3(&o, &Point3::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(
            distance3(&Point3::new(1.0, 2.0, 3.0), &Point3::new(4.0, 6.0, 15.0)),
            13.0
        );
    }

    #[test]
    fn segment_cases() {
        let b = unit();
        let p = |x, y, z| Point3::new(x, y, z);
        assert!(segment_intersects_box(
            &p(-1.0, 0.5, 0.5),
            &p(2.0, 0.5, 0.5),
            &b
        ));
        assert!(!segment_intersects_box(
            &p(-1.0, 5.0, 5.0),
            &p(2.0, 5.0, 5.0),
            &b
        ));
        assert!(!segment_intersects_box(
            &p(0.0, 0.0, 1.0),
            &p(1.0, 1.0, 1.0),
            &b
        ));
        // through a vertex only
        let shifted = BoxObstacle::new(1, 1.0, 1.0, 2.0, 2.0, 1.0).unwrap();
        assert!(!segment_intersects_box(
            &p(0.0, 2.0, 0.5),
            &p(2.0, 0.0, 0.5),
            &shifted
        ));
        // along a vertical edge
        assert!(!segment_intersects_box(
            &p(0.0, 0.0, 0.2),
            &p(0.0, 0.0, 0.9),
            &b
        ));
        // ending inside
        assert!(segment_intersects_box(
            &p(-1.0, 0.5, 0.5),
            &p(0.5, 0.5, 0.5),
            &b
        ));
        // ending on a face
        assert!(!segment_intersects_box(
            &p(-1.0, 0.5, 0.5),
            &p(0.0, 0.5, 0.5),
            &b
        ));
    }

    #[test]
    fn unit_box_gives_corners() {
        let pts = discretize_edges(&unit(), 10.0).unwrap();
        assert_eq!(pts.len(), 8);
        assert!(discretize_edges(&unit(), 0.0).is_err());
        assert!(discretize_edges(&unit(), -1.0).is_err());
    }

    #[test]
    fn tall_box_vertical_edges() {
        let b = BoxObstacle::new(0, 0.0, 0.0, 40.0, 40.0, 100.0).unwrap();
        let pts = discretize_edges(&b, 10.0).unwrap();
        for (cx, cy) in [(0.0, 0.0), (40.0, 0.0), (40.0, 40.0), (0.0, 40.0)] {
            let on_edge = pts.iter().filter(|p| p.x == cx && p.y == cy).count();
            assert_eq!(on_edge, 11);
        }
        // 4 vertical edges * 11 + 4 top edges * (5 - 2 shared corners)
        assert_eq!(pts.len(), 44 + 12);
    }
}
