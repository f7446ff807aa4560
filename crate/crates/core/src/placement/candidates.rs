use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxObstacle;
use crate::scenario::Region;

/// Horizontal candidate positions. A candidate's id is its index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub points: Vec<(f64, f64)>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Drops candidates whose vertical line passes through a building.
    pub fn without_footprints(&self, obstacles: &[BoxObstacle]) -> CandidateSet {
        CandidateSet {
            points: self
                .points
                .iter()
                .copied()
                .filter(|&(x, y)| !obstacles.iter().any(|o| o.footprint_contains(x, y)))
                .collect(),
        }
    }
}

/// Hexagonal lattice centred on the region. Rows are `spacing * sqrt(3)/2`
/// apart and every other row is shifted by half a spacing. Only points
/// strictly inside the region are kept; output is sorted by row, then x.
pub fn generate_candidates(region: &Region, spacing: f64) -> Result<CandidateSet> {
    region.validate()?;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidInput(format!(
            "candidate spacing must be positive, got {spacing}"
        )));
    }
    let (cx, cy) = (0.5 * region.width, 0.5 * region.height);
    let dy = spacing * 3f64.sqrt() / 2.0;
    let rows = (cy / dy).ceil() as i64 + 1;
    let cols = (cx / spacing).ceil() as i64 + 1;
    let mut points = Vec::new();
    for k in -rows..=rows {
        let y = cy + k as f64 * dy;
        if !(y > 0.0 && y < region.height) {
            continue;
        }
        let shift = if k.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
        for n in -cols - 1..=cols {
            let x = cx + (n as f64 + shift) * spacing;
            if x > 0.0 && x < region.width {
                points.push((x, y));
            }
        }
    }
    Ok(CandidateSet { points })
}
