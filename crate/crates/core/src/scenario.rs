//! World generation and user dynamics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxObstacle, Point3};

/// Rectangular service area `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Region {
    pub width: f64,
    pub height: f64,
}

impl Default for Region {
    fn default() -> Self {
        Region {
            width: 5000.0,
            height: 5000.0,
        }
    }
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        if self.width > 0.0
            && self.height > 0.0
            && self.width.is_finite()
            && self.height.is_finite()
        {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "region must have positive size, got {self:?}"
            )))
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityClass {
    Stationary,
    Pedestrian,
    Vehicular,
}

/// Share of each mobility class in percent, with class speeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityMix {
    pub alpha: f64,
    pub beta_pct: f64,
    pub gamma: f64,
    pub v_pedestrian: f64,
    pub v_vehicular: f64,
}

impl Default for MobilityMix {
    fn default() -> Self {
        MobilityMix {
            alpha: 50.0,
            beta_pct: 30.0,
            gamma: 20.0,
            v_pedestrian: 1.0,
            v_vehicular: 10.0,
        }
    }
}

impl MobilityMix {
    pub fn validate(&self) -> Result<()> {
        let shares = [self.alpha, self.beta_pct, self.gamma];
        if shares.iter().any(|s| !(*s >= 0.0)) || (shares.iter().sum::<f64>() - 100.0).abs() > 1e-9
        {
            return Err(Error::InvalidInput(format!(
                "mobility shares must be non-negative and sum to 100, got {shares:?}"
            )));
        }
        if !(self.v_pedestrian >= 0.0 && self.v_vehicular >= 0.0)
            || !self.v_pedestrian.is_finite()
            || !self.v_vehicular.is_finite()
        {
            return Err(Error::InvalidInput(
                "mobility speeds must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn speed(&self, class: MobilityClass) -> f64 {
        match class {
            MobilityClass::Stationary => 0.0,
            MobilityClass::Pedestrian => self.v_pedestrian,
            MobilityClass::Vehicular => self.v_vehicular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: usize,
    pub pos: Point3,
    /// Requested rate, Mbps.
    pub demand: f64,
    pub mobility_class: MobilityClass,
    pub waypoint: Option<Point3>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UserParams {
    pub count: usize,
    /// Demands are uniform in `(0, d_max]`, Mbps.
    pub d_max: f64,
    /// Share of users placed above ground, in `[0, 1]`.
    pub rooftop_fraction: f64,
    /// Highest user altitude, m.
    pub altitude_max: f64,
}

impl Default for UserParams {
    fn default() -> Self {
        UserParams {
            count: 80,
            d_max: 6.0,
            rooftop_fraction: 0.2,
            altitude_max: 150.0,
        }
    }
}

impl UserParams {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidInput("user count must be positive".into()));
        }
        if !(self.d_max > 0.0) || !self.d_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "d_max must be positive, got {}",
                self.d_max
            )));
        }
        if !(0.0..=1.0).contains(&self.rooftop_fraction) {
            return Err(Error::InvalidInput(
                "rooftop_fraction must lie in [0, 1]".into(),
            ));
        }
        if !(self.altitude_max >= 0.0) {
            return Err(Error::InvalidInput(
                "altitude_max must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Splits `count` into class counts proportional to the mix (largest
/// remainder, ties to the earlier class).
fn class_counts(count: usize, mix: &MobilityMix) -> [usize; 3] {
    let shares = [mix.alpha, mix.beta_pct, mix.gamma];
    let exact: Vec<f64> = shares.iter().map(|s| s * count as f64 / 100.0).collect();
    let mut n = [0usize; 3];
    for k in 0..3 {
        n[k] = exact[k].floor() as usize;
    }
    let mut rest = count - n.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    for k in order {
        if rest == 0 {
            break;
        }
        n[k] += 1;
        rest -= 1;
    }
    n
}

fn uniform_point(region: &Region, z: f64, rng: &mut ChaCha8Rng) -> Point3 {
    Point3::new(
        rng.gen::<f64>() * region.width,
        rng.gen::<f64>() * region.height,
        z,
    )
}

/// Places `params.count` users uniformly in the region (a point process
/// conditioned on its count). Class shares follow `mix` exactly up to
/// rounding; classes are assigned in id order.
pub fn spawn_users(
    region: &Region,
    params: &UserParams,
    mix: &MobilityMix,
    seed: u64,
) -> Result<Vec<User>> {
    region.validate()?;
    params.validate()?;
    mix.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = class_counts(params.count, mix);
    let classes = [
        MobilityClass::Stationary,
        MobilityClass::Pedestrian,
        MobilityClass::Vehicular,
    ];
    let mut users = Vec::with_capacity(params.count);
    for (class, &n) in classes.iter().zip(&counts) {
        for _ in 0..n {
            let z = if rng.gen::<f64>() < params.rooftop_fraction {
                rng.gen::<f64>() * params.altitude_max
            } else {
                0.0
            };
            let pos = uniform_point(region, z, &mut rng);
            let demand = params.d_max * (1.0 - rng.gen::<f64>());
            let waypoint = match class {
                MobilityClass::Stationary => None,
                _ => Some(uniform_point(region, z, &mut rng)),
            };
            users.push(User {
                id: users.len(),
                pos,
                demand,
                mobility_class: *class,
                waypoint,
            });
        }
    }
    Ok(users)
}

/// Weighted mean user speed, stationary users counting as zero.
pub fn mean_speed(mix: &MobilityMix) -> f64 {
    (mix.beta_pct * mix.v_pedestrian + mix.gamma * mix.v_vehicular) / 100.0
}

/// Time for an average user to leave the minimum coverage radius.
pub fn snapshot_interval(r_min: f64, mix: &MobilityMix) -> Result<f64> {
    let g = mean_speed(mix);
    if !(g > 0.0) {
        return Err(Error::AllStationary);
    }
    if !(r_min > 0.0) {
        return Err(Error::InvalidInput(format!(
            "r_min must be positive, got {r_min}"
        )));
    }
    Ok(r_min / g)
}

/// Advances every mobile user along its waypoint chain for `dt` seconds.
/// Arrival draws a fresh waypoint and the remaining time is spent toward it.
pub fn step_random_waypoint(
    users: &[User],
    region: &Region,
    mix: &MobilityMix,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<User>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let mut out = users.to_vec();
    for u in &mut out {
        let v = mix.speed(u.mobility_class);
        if v == 0.0 {
            continue;
        }
        let mut budget = v * dt;
        // Bounded so that a run of near-zero legs cannot spin forever.
        for _ in 0..10_000 {
            let wp = match u.waypoint {
                Some(w) => w,
                None => uniform_point(region, u.pos.z, rng),
            };
            let leg = u.pos.horizontal_distance(&wp);
            if leg > budget {
                u.pos = u.pos.lerp(&wp, budget / leg);
                u.pos.z = wp.z;
                u.waypoint = Some(wp);
                break;
            }
            budget -= leg;
            u.pos = wp;
            u.waypoint = Some(uniform_point(region, u.pos.z, rng));
            if budget <= 0.0 {
                break;
            }
        }
        u.pos.x = u.pos.x.clamp(0.0, region.width);
        u.pos.y = u.pos.y.clamp(0.0, region.height);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleParams {
    pub count: usize,
    pub footprint_min: f64,
    pub footprint_max: f64,
    pub height_min: f64,
    pub height_max: f64,
    /// Smallest horizontal gap between two buildings, m.
    pub gap: f64,
    /// Buildings keep this horizontal clearance from the base, m.
    pub base_clearance: f64,
}

impl Default for ObstacleParams {
    fn default() -> Self {
        ObstacleParams {
            count: 25,
            footprint_min: 20.0,
            footprint_max: 60.0,
            height_min: 30.0,
            height_max: 150.0,
            gap: 10.0,
            base_clearance: 50.0,
        }
    }
}

impl ObstacleParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.footprint_min > 0.0
            && self.footprint_min <= self.footprint_max
            && self.height_min > 0.0
            && self.height_min <= self.height_max
            && self.gap >= 0.0
            && self.base_clearance >= 0.0
            && [
                self.footprint_max,
                self.height_max,
                self.gap,
                self.base_clearance,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "obstacle bounds inconsistent: {self:?}"
            )))
        }
    }
}

/// Drops non-overlapping buildings uniformly in the region by rejection.
pub fn generate_obstacles(
    region: &Region,
    params: &ObstacleParams,
    base: &Point3,
    seed: u64,
) -> Result<Vec<BoxObstacle>> {
    region.validate()?;
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<BoxObstacle> = Vec::with_capacity(params.count);
    let mut attempts = 0usize;
    while out.len() < params.count {
        attempts += 1;
        if attempts > 1000 * (params.count + 1) {
            return Err(Error::InvalidInput(format!(
                "could not place {} non-overlapping obstacles",
                params.count
            )));
        }
        let w = rng.gen_range(params.footprint_min..=params.footprint_max);
        let d = rng.gen_range(params.footprint_min..=params.footprint_max);
        let h = rng.gen_range(params.height_min..=params.height_max);
        if w >= region.width || d >= region.height {
            continue;
        }
        let x0 = rng.gen::<f64>() * (region.width - w);
        let y0 = rng.gen::<f64>() * (region.height - d);
        let (x1, y1) = (x0 + w, y0 + d);
        let c = params.base_clearance;
        if base.x > x0 - c && base.x < x1 + c && base.y > y0 - c && base.y < y1 + c {
            continue;
        }
        let g = params.gap;
        let clash = out
            .iter()
            .any(|o| x0 < o.max.x + g && o.min.x < x1 + g && y0 < o.max.y + g && o.min.y < y1 + g);
        if clash {
            continue;
        }
        out.push(BoxObstacle::new(out.len(), x0, y0, x1, y1, h)?);
    }
    Ok(out)
}
