use fbs_milp::Model;

use super::{CandidateSet, PlacementInstance, PlacementParams};
use crate::channel::Environment;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// A placement MILP together with the index maps back to the instance.
///
/// Column layout: `m_i` for every candidate, then `x_ij`, `h_i`, `k_ij`,
/// `t_ij`. Pair columns exist for every pair of the full model and for the
/// eligible pairs only in the reduced model the solver uses.
#[derive(Debug, Clone)]
pub struct PlacementMilp {
    pub model: Model,
    pub instance: PlacementInstance,
    pub p: usize,
    pub m: Vec<usize>,
    pub h: Vec<usize>,
    /// `(i, j, x, k, t)` column indices of every modelled pair.
    pub pairs: Vec<(usize, usize, usize, usize, usize)>,
    /// Big-M of the `k <= M x` rows (full model only).
    pub big_m: f64,
}

impl PlacementMilp {
    /// Number of `x` columns.
    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Rows whose name starts with `family`.
    pub fn rows_in_family(&self, family: &str) -> usize {
        self.model
            .rows
            .iter()
            .filter(|r| r.name.split('[').next() == Some(family))
            .count()
    }

    /// CPLEX LP text of the model.
    pub fn to_lp_format(&self) -> String {
        self.model.to_lp_format()
    }
}

/// Row families of the full model, in emission order.
pub const ROW_FAMILIES: [&str; 15] = [
    "assign_once",
    "channels",
    "open",
    "cover_all",
    "backhaul",
    "fleet_size",
    "alt_max",
    "alt_min",
    "cone",
    "loss",
    "loss_cap",
    "prod_h",
    "prod_x",
    "prod_lo",
    "gate",
];

/// Complete MILP over every candidate/user pair.
pub fn build_milp(
    users: &[Point3],
    demands: &[f64],
    candidates: &CandidateSet,
    p: usize,
    env: &Environment,
    params: &PlacementParams,
) -> Result<PlacementMilp> {
    let inst = PlacementInstance::new(candidates, users, demands, env, params)?;
    build_model(&inst, p, false)
}

/// Builds the model for `inst`. With `reduced`, pairs that can never be
/// served are left out, the `k <= M x` rows are omitted (minimization already
/// drives `k` to its lower bound), redundant gate rows are skipped and the
/// product columns are tightened with valid bounds.
pub(crate) fn build_model(
    inst: &PlacementInstance,
    p: usize,
    reduced: bool,
) -> Result<PlacementMilp> {
    if p == 0 {
        return Err(Error::InvalidInput("fleet size must be at least 1".into()));
    }
    let prm = &inst.params;
    let (ni, nu) = (inst.num_candidates(), inst.num_users());
    let h0 = inst.h0;
    let factor = prm.big_m_factor;
    let w_max = 10f64.powf(inst.env.delta_nlos.max(inst.env.delta_los) / 10.0);
    let diag = inst
        .pairs
        .iter()
        .flatten()
        .map(|d| d.r)
        .fold(0.0f64, f64::max);
    let big_m =
        factor * w_max * (diag * diag + 2.0 * h0 * prm.h_max - h0 * h0).max(h0 * h0) / (h0 * h0);

    let mut model = Model::new();
    let m: Vec<usize> = (0..ni)
        .map(|i| model.add_binary(format!("m[{i}]"), 0.0, 0))
        .collect();
    let chosen: Vec<(usize, usize)> = (0..ni)
        .flat_map(|i| (0..nu).map(move |j| (i, j)))
        .filter(|&(i, j)| !reduced || inst.eligible(i, j))
        .collect();
    let xs: Vec<usize> = chosen
        .iter()
        .map(|&(i, j)| model.add_binary(format!("x[{i},{j}]"), 0.0, 1))
        .collect();
    let h: Vec<usize> = (0..ni)
        .map(|i| model.add_var(format!("h[{i}]"), 0.0, prm.h_max, 0.0))
        .collect();
    let ks: Vec<usize> = chosen
        .iter()
        .map(|&(i, j)| {
            let ub = if reduced {
                let (_, hi) = inst.altitude_window(i, j);
                inst.pair_cost(i, j, hi)
            } else {
                big_m
            };
            model.add_var(format!("k[{i},{j}]"), 0.0, ub, 1.0)
        })
        .collect();
    let ts: Vec<usize> = chosen
        .iter()
        .map(|&(i, j)| model.add_var(format!("t[{i},{j}]"), 0.0, prm.h_max, 0.0))
        .collect();

    let mut by_user: Vec<Vec<usize>> = vec![Vec::new(); nu];
    let mut by_cand: Vec<Vec<usize>> = vec![Vec::new(); ni];
    for (q, &(i, j)) in chosen.iter().enumerate() {
        by_user[j].push(q);
        by_cand[i].push(q);
    }
    let inf = f64::INFINITY;

    for j in 0..nu {
        let coefs = by_user[j].iter().map(|&q| (xs[q], 1.0)).collect();
        model.add_row(format!("assign_once[{j}]"), coefs, -inf, 1.0);
    }
    for i in 0..ni {
        let mut coefs: Vec<(usize, f64)> = by_cand[i].iter().map(|&q| (xs[q], 1.0)).collect();
        let cap = prm.psi as f64;
        if reduced {
            coefs.push((m[i], -cap));
            model.add_row(format!("channels[{i}]"), coefs, -inf, 0.0);
        } else {
            model.add_row(format!("channels[{i}]"), coefs, -inf, cap);
        }
    }
    for (q, &(i, j)) in chosen.iter().enumerate() {
        model.add_row(
            format!("open[{i},{j}]"),
            vec![(xs[q], 1.0), (m[i], -1.0)],
            -inf,
            0.0,
        );
    }
    let all: Vec<(usize, f64)> = xs.iter().map(|&x| (x, 1.0)).collect();
    model.add_row("cover_all", all, nu as f64, nu as f64);
    for i in 0..ni {
        let mut coefs: Vec<(usize, f64)> = by_cand[i]
            .iter()
            .map(|&q| (xs[q], inst.demands[chosen[q].1]))
            .collect();
        coefs.push((m[i], -prm.backhaul_rate));
        model.add_row(format!("backhaul[{i}]"), coefs, -inf, 0.0);
    }
    let fleet: Vec<(usize, f64)> = m.iter().map(|&v| (v, 1.0)).collect();
    model.add_row("fleet_size", fleet, p as f64, p as f64);
    for i in 0..ni {
        model.add_row(
            format!("alt_max[{i}]"),
            vec![(h[i], 1.0), (m[i], -prm.h_max)],
            -inf,
            0.0,
        );
        model.add_row(
            format!("alt_min[{i}]"),
            vec![(h[i], 1.0), (m[i], -prm.h_min)],
            0.0,
            inf,
        );
    }
    for (q, &(i, j)) in chosen.iter().enumerate() {
        let d = &inst.pairs[i][j];
        model.add_row(
            format!("cone[{i},{j}]"),
            vec![(xs[q], d.cone), (h[i], -1.0)],
            -inf,
            0.0,
        );
    }
    for (q, &(i, j)) in chosen.iter().enumerate() {
        let d = &inst.pairs[i][j];
        let cx = d.w * d.lin0 / (h0 * h0);
        let ct = 2.0 * d.w / h0;
        model.add_row(
            format!("loss[{i},{j}]"),
            vec![(xs[q], cx), (ts[q], ct), (ks[q], -1.0)],
            -inf,
            0.0,
        );
    }
    if !reduced {
        for (q, &(i, j)) in chosen.iter().enumerate() {
            model.add_row(
                format!("loss_cap[{i},{j}]"),
                vec![(ks[q], 1.0), (xs[q], -big_m)],
                -inf,
                0.0,
            );
        }
    }
    for (q, &(i, j)) in chosen.iter().enumerate() {
        model.add_row(
            format!("prod_h[{i},{j}]"),
            vec![(ts[q], 1.0), (h[i], -1.0)],
            -inf,
            0.0,
        );
    }
    for (q, &(i, j)) in chosen.iter().enumerate() {
        let cap = if reduced {
            inst.altitude_window(i, j).1
        } else {
            prm.h_max
        };
        model.add_row(
            format!("prod_x[{i},{j}]"),
            vec![(ts[q], 1.0), (xs[q], -cap)],
            -inf,
            0.0,
        );
    }
    for (q, &(i, j)) in chosen.iter().enumerate() {
        model.add_row(
            format!("prod_lo[{i},{j}]"),
            vec![(ts[q], 1.0), (h[i], -1.0), (xs[q], -prm.h_max)],
            -prm.h_max,
            inf,
        );
    }
    for (q, &(i, j)) in chosen.iter().enumerate() {
        let gate = inst.pairs[i][j].gate;
        if reduced && gate >= prm.h_max {
            continue;
        }
        // x <= (Mg - h) / (Mg - a + 1/2), with the half already inside `gate`.
        let mg = factor * gate.abs().max(prm.h_max);
        model.add_row(
            format!("gate[{i},{j}]"),
            vec![(xs[q], mg - gate), (h[i], 1.0)],
            -inf,
            mg,
        );
    }
    if reduced {
        for (q, &(i, j)) in chosen.iter().enumerate() {
            let lo = inst.altitude_window(i, j).0;
            model.add_row(
                format!("prod_cut[{i},{j}]"),
                vec![(ts[q], 1.0), (xs[q], -lo)],
                0.0,
                inf,
            );
        }
    }

    let pairs = chosen
        .iter()
        .enumerate()
        .map(|(q, &(i, j))| (i, j, xs[q], ks[q], ts[q]))
        .collect();
    Ok(PlacementMilp {
        model,
        instance: inst.clone(),
        p,
        m,
        h,
        pairs,
        big_m,
    })
}
