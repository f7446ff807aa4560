use super::{PlacementInstance, PlacementSolution};
use crate::channel;
use crate::geometry::Point3;

/// Re-checks every constraint family of a placement from the raw positions,
/// demands and parameters. Returns the first violation found.
pub fn validate_solution(
    inst: &PlacementInstance,
    p: usize,
    sol: &PlacementSolution,
) -> Result<(), String> {
    let prm = &inst.params;
    let tol = 1e-6;
    let nu = inst.users.len();
    if sol.selected.len() != p {
        return Err(format!(
            "{} FBSs selected, expected {p}",
            sol.selected.len()
        ));
    }
    for w in sol.selected.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err("selected candidates not sorted and distinct".into());
        }
    }
    if sol.assignment.len() != nu || sol.path_loss.len() != nu {
        return Err("assignment does not cover every user exactly once".into());
    }
    let cot = 1.0 / prm.theta_deg.to_radians().tan();
    let mut objective = 0.0;
    for &(i, h) in &sol.selected {
        if i >= inst.candidates.len() {
            return Err(format!("candidate {i} does not exist"));
        }
        if h < prm.h_min - tol || h > prm.h_max + tol {
            return Err(format!(
                "FBS at candidate {i} flies at {h} m, outside the altitude band"
            ));
        }
        let (cx, cy) = inst.candidates[i];
        let fbs = Point3::new(cx, cy, h);
        let served: Vec<usize> = (0..nu).filter(|&j| sol.assignment[j] == i).collect();
        if served.len() > prm.psi {
            return Err(format!(
                "FBS {i} serves {} users, above the channel limit",
                served.len()
            ));
        }
        let load: f64 = served.iter().map(|&j| inst.demands[j]).sum();
        if load > prm.backhaul_rate + tol {
            return Err(format!(
                "FBS {i} carries {load} Mbps, above the backhaul rate"
            ));
        }
        for &j in &served {
            let u = &inst.users[j];
            let r = (cx - u.x).hypot(cy - u.y);
            let dz = h - u.z;
            if dz <= 0.0 || cot * r > dz + tol {
                return Err(format!("user {j} outside the coverage cone of FBS {i}"));
            }
            let gate = channel::taylor_gate(r, inst.h0, &inst.env).map_err(|e| e.to_string())?;
            if dz > gate - 0.5 + tol {
                return Err(format!("FBS {i} above the path-loss gate of user {j}"));
            }
            let loss = channel::link_loss(&fbs, u, &inst.env).map_err(|e| e.to_string())?;
            if (loss - sol.path_loss[j]).abs() > 1e-9 * loss.abs() {
                return Err(format!(
                    "reported path loss of user {j} is {}, actual {loss}",
                    sol.path_loss[j]
                ));
            }
            let zr = (inst.h0 - u.z).max(super::MIN_CLEARANCE);
            let theta0 = if r == 0.0 {
                90.0
            } else {
                zr.atan2(r).to_degrees()
            };
            let w = channel::excess_weight(theta0, &inst.env).map_err(|e| e.to_string())?;
            let sq = r * r + 2.0 * inst.h0 * dz - inst.h0 * inst.h0;
            objective += w * sq.max(0.0) / (inst.h0 * inst.h0);
        }
    }
    for (j, &i) in sol.assignment.iter().enumerate() {
        if sol.selected.binary_search_by_key(&i, |s| s.0).is_err() {
            return Err(format!("user {j} assigned to unselected candidate {i}"));
        }
    }
    if (objective - sol.objective).abs() > 1e-9 * objective.abs().max(1.0) {
        return Err(format!(
            "reported objective {} differs from recomputed {objective}",
            sol.objective
        ));
    }
    Ok(())
}
