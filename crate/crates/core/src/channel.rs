//! Air-to-ground channel: LoS probability, LoS/NLoS losses, their
//! probability-weighted mean, and the altitude gate used by placement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Environment constants of the channel model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Environment {
    /// S-curve constant `a` (unitless).
    pub a: f64,
    /// S-curve constant `b` (unitless).
    pub b: f64,
    /// Excess loss of the LoS component, dB.
    pub delta_los: f64,
    /// Excess loss of the NLoS component, dB.
    pub delta_nlos: f64,
    /// Carrier frequency, Hz.
    pub fc: f64,
    /// Propagation speed, m/s.
    pub c: f64,
    /// Largest admissible path loss, dB.
    pub pl_max: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            a: 9.61,
            b: 0.16,
            delta_los: 1.0,
            delta_nlos: 20.0,
            fc: 2e9,
            c: SPEED_OF_LIGHT,
            pl_max: 110.0,
        }
    }
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        let ok = self.a > 0.0 && self.b > 0.0 && self.fc > 0.0 && self.c > 0.0 && self.pl_max > 0.0;
        let finite = [
            self.a,
            self.b,
            self.delta_los,
            self.delta_nlos,
            self.fc,
            self.c,
            self.pl_max,
        ]
        .iter()
        .all(|v| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "channel constants out of range: {self:?}"
            )))
        }
    }

    /// `(4 pi fc / c)^2`, the free-space factor in front of `d^2`.
    pub fn free_space_factor(&self) -> f64 {
        let k = 4.0 * std::f64::consts::PI * self.fc / self.c;
        k * k
    }

    pub fn pl_max_linear(&self) -> f64 {
        10f64.powf(self.pl_max / 10.0)
    }
}

/// Elevation of `fbs` seen from `user`, in degrees within (0, 90].
pub fn elevation_angle(fbs: &Point3, user: &Point3) -> Result<f64> {
    let dz = fbs.z - user.z;
    if !(dz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "FBS altitude {} must exceed user altitude {}",
            fbs.z, user.z
        )));
    }
    let r = fbs.horizontal_distance(user);
    if r == 0.0 {
        return Ok(90.0);
    }
    Ok(dz.atan2(r).to_degrees())
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 90.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "elevation angle {theta} outside (0, 90]"
        )))
    }
}

pub fn los_probability(theta: f64, env: &Environment) -> Result<f64> {
    check_theta(theta)?;
    Ok(1.0 / (1.0 + env.a * (-env.b * (theta - env.a)).exp()))
}

pub fn nlos_probability(theta: f64, env: &Environment) -> Result<f64> {
    Ok(1.0 - los_probability(theta, env)?)
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "distance {d} must be positive"
        )))
    }
}

/// `20 log10(4 pi fc d / c)`.
pub fn free_space_loss(d: f64, env: &Environment) -> Result<f64> {
    check_distance(d)?;
    Ok(20.0 * (4.0 * std::f64::consts::PI * env.fc * d / env.c).log10())
}

pub fn los_loss(d: f64, env: &Environment) -> Result<f64> {
    Ok(free_space_loss(d, env)? + env.delta_los)
}

pub fn nlos_loss(d: f64, env: &Environment) -> Result<f64> {
    Ok(free_space_loss(d, env)? + env.delta_nlos)
}

/// Probability-weighted mean path loss in dB.
pub fn mean_path_loss(d: f64, theta: f64, env: &Environment) -> Result<f64> {
    let p = los_probability(theta, env)?;
    let fs = free_space_loss(d, env)?;
    Ok(p * (fs + env.delta_los) + (1.0 - p) * (fs + env.delta_nlos))
}

/// Mean path loss between two points, in dB.
pub fn link_loss(fbs: &Point3, user: &Point3, env: &Environment) -> Result<f64> {
    let theta = elevation_angle(fbs, user)?;
    mean_path_loss(crate::geometry::distance3(fbs, user), theta, env)
}

/// Linear excess-loss factor `10^(eta/10)` with
/// `eta = P_LoS delta_LoS + P_NLoS delta_NLoS`. The mean loss in the linear
/// domain is `A d^2 * excess_weight`.
pub fn excess_weight(theta: f64, env: &Environment) -> Result<f64> {
    let p = los_probability(theta, env)?;
    let eta = p * env.delta_los + (1.0 - p) * env.delta_nlos;
    Ok(10f64.powf(eta / 10.0))
}

/// Altitude gate `a_ij` from the first-order expansion of `h^2` around `h0`:
/// a pair may be served only while the relative altitude stays below it.
/// `d_ij` is the horizontal distance. The probability sum in front of the
/// distance term is identically one.
pub fn taylor_gate(d_ij: f64, h0: f64, env: &Environment) -> Result<f64> {
    if !(h0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "expansion altitude {h0} must be positive"
        )));
    }
    if !(d_ij >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "distance {d_ij} must be non-negative"
        )));
    }
    let a = env.free_space_factor();
    Ok((env.pl_max_linear() - a * (d_ij * d_ij - h0 * h0)) / (2.0 * a * h0))
}
