use std::collections::BTreeMap;
use std::time::Duration;

use fbs_milp::{branch_and_bound, BnbOptions, BnbStatus, Model};

use super::model::build_model;
use super::{greedy_placement, polish, PlacementInstance, PlacementMilp, PlacementSolution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Optimal(PlacementSolution),
    Infeasible,
    /// The time or node limit ran out first; carries the best solution found, if any.
    TimedOut(Option<PlacementSolution>),
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&PlacementSolution> {
        match self {
            SolveOutcome::Optimal(s) | SolveOutcome::TimedOut(Some(s)) => Some(s),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Optimal(_) => "optimal",
            SolveOutcome::Infeasible => "infeasible",
            SolveOutcome::TimedOut(Some(_)) => "timed_out",
            SolveOutcome::TimedOut(None) => "timed_out_empty",
        }
    }
}

/// Solves `milp` to proven optimality unless `time_limit` runs out.
///
/// Branch-and-bound runs on the reduced model of the same instance, which
/// has the same integer optimum as `milp.model`. Altitudes of the returned
/// solution are the lowest feasible ones for each open FBS.
pub fn solve_exact(milp: &PlacementMilp, time_limit: Option<Duration>) -> SolveOutcome {
    solve_instance(&milp.instance, milp.p, time_limit)
}

fn trivially_infeasible(inst: &PlacementInstance, p: usize) -> bool {
    let nu = inst.num_users();
    p == 0
        || p > inst.num_candidates()
        || p * inst.params.psi < nu
        || (0..nu).any(|j| !(0..inst.num_candidates()).any(|i| inst.eligible(i, j)))
}

pub fn solve_instance(
    inst: &PlacementInstance,
    p: usize,
    time_limit: Option<Duration>,
) -> SolveOutcome {
    solve_from(inst, p, time_limit, None)
}

/// As [`solve_instance`], with an extra known solution of size `p` to start
/// from.
fn solve_from(
    inst: &PlacementInstance,
    p: usize,
    time_limit: Option<Duration>,
    known: Option<PlacementSolution>,
) -> SolveOutcome {
    if trivially_infeasible(inst, p) {
        return SolveOutcome::Infeasible;
    }
    let milp = match build_model(inst, p, true) {
        Ok(m) => m,
        Err(_) => return SolveOutcome::Infeasible,
    };
    let start = match (
        greedy_placement(inst, Some(p)),
        known.filter(|k| k.fbs_count() == p),
    ) {
        (Some(g), Some(k)) => Some(if k.objective < g.objective { k } else { g }),
        (g, k) => g.or(k),
    };
    let start_x = start.as_ref().map(|s| to_columns(&milp, s));
    let opts = BnbOptions {
        time_limit,
        node_limit: inst.params.node_limit,
        ..BnbOptions::default()
    };
    let res = branch_and_bound(&milp.model, &opts, start_x.as_deref());
    let found = res.x.as_ref().and_then(|x| from_columns(&milp, x));
    let best = match (found, start) {
        (Some(a), Some(b)) => Some(
            if b.objective < a.objective - 1e-9 * a.objective.abs().max(1.0) {
                b
            } else {
                a
            },
        ),
        (a, b) => a.or(b),
    };
    match res.status {
        BnbStatus::Optimal => match best {
            Some(s) => SolveOutcome::Optimal(s),
            None => SolveOutcome::TimedOut(None),
        },
        BnbStatus::Infeasible => SolveOutcome::Infeasible,
        BnbStatus::Incomplete => SolveOutcome::TimedOut(best),
    }
}

/// Column vector of the reduced model for a known solution.
fn to_columns(milp: &PlacementMilp, sol: &PlacementSolution) -> Vec<f64> {
    let inst = &milp.instance;
    let mut x = vec![0.0; milp.model.num_vars()];
    for &(i, h) in &sol.selected {
        x[milp.m[i]] = 1.0;
        x[milp.h[i]] = h;
    }
    for &(i, j, xv, kv, tv) in &milp.pairs {
        if sol.assignment[j] == i {
            let h = x[milp.h[i]];
            x[xv] = 1.0;
            x[tv] = h;
            x[kv] = inst.pair_cost(i, j, h);
        }
    }
    x
}

fn from_columns(milp: &PlacementMilp, x: &[f64]) -> Option<PlacementSolution> {
    let open: Vec<usize> = (0..milp.m.len()).filter(|&i| x[milp.m[i]] > 0.5).collect();
    let mut assignment = vec![usize::MAX; milp.instance.num_users()];
    for &(i, j, xv, _, _) in &milp.pairs {
        if x[xv] > 0.5 {
            if assignment[j] != usize::MAX {
                return None;
            }
            assignment[j] = i;
        }
    }
    if assignment.contains(&usize::MAX) {
        return None;
    }
    milp.instance.solution_from_assignment(&open, &assignment)
}

/// Result of the fleet-count relaxation.
struct CountBound {
    /// No feasible placement uses fewer FBSs.
    lower: usize,
    /// Best cover found, if its groups also admit a common altitude.
    cover: Option<PlacementSolution>,
}

/// Fewest open candidates that serve every user within the channel and
/// backhaul limits, with each pair individually in its altitude window but
/// no common altitude required per FBS. Any placement is feasible here, so
/// the optimum bounds the fleet size from below; when the best cover also
/// has a common altitude per FBS the bound is attained.
fn count_bound(inst: &PlacementInstance, limit: Option<Duration>) -> Option<CountBound> {
    let (nc, nu) = (inst.num_candidates(), inst.num_users());
    let mut model = Model::new();
    let m: Vec<usize> = (0..nc)
        .map(|i| model.add_binary(format!("m{i}"), 1.0, 0))
        .collect();
    let mut by_user = vec![Vec::new(); nu];
    let mut by_cand = vec![Vec::new(); nc];
    let mut pairs = Vec::new();
    for i in 0..nc {
        for j in 0..nu {
            if inst.eligible(i, j) {
                let x = model.add_binary(format!("x{i}_{j}"), 0.0, 1);
                by_user[j].push((x, 1.0));
                by_cand[i].push((j, x));
                pairs.push((i, j, x));
                model.add_row(
                    format!("open{i}_{j}"),
                    vec![(x, 1.0), (m[i], -1.0)],
                    f64::NEG_INFINITY,
                    0.0,
                );
            }
        }
    }
    for (j, coefs) in by_user.into_iter().enumerate() {
        if coefs.is_empty() {
            return None;
        }
        model.add_row(format!("assign_once{j}"), coefs, 1.0, 1.0);
    }
    for (i, list) in by_cand.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let mut ch: Vec<(usize, f64)> = list.iter().map(|&(_, x)| (x, 1.0)).collect();
        ch.push((m[i], -(inst.params.psi as f64)));
        model.add_row(format!("channels{i}"), ch, f64::NEG_INFINITY, 0.0);
        let mut bh: Vec<(usize, f64)> = list.iter().map(|&(j, x)| (x, inst.demands[j])).collect();
        bh.push((m[i], -inst.params.backhaul_rate));
        model.add_row(format!("backhaul{i}"), bh, f64::NEG_INFINITY, 0.0);
    }
    let opts = BnbOptions {
        time_limit: limit,
        abs_gap: 1.0 - 1e-6,
        ..BnbOptions::default()
    };
    let res = branch_and_bound(&model, &opts, None);
    if res.status == BnbStatus::Infeasible {
        return Some(CountBound {
            lower: nc + 1,
            cover: None,
        });
    }
    let lower = if res.status == BnbStatus::Optimal {
        res.objective.round() as usize
    } else {
        (res.best_bound - 1e-6).ceil().max(0.0) as usize
    };
    let cover = res.x.and_then(|x| {
        let open: Vec<usize> = (0..nc).filter(|&i| x[m[i]] > 0.5).collect();
        let mut assignment = vec![usize::MAX; nu];
        for &(i, j, xv) in &pairs {
            if x[xv] > 0.5 {
                assignment[j] = i;
            }
        }
        let raw = inst.solution_from_assignment(&open, &assignment)?;
        Some(polish(inst, &raw).unwrap_or(raw))
    });
    Some(CountBound { lower, cover })
}

/// Smallest fleet size whose placement problem is feasible, with its
/// solution.
///
/// Bisection runs over `[lo, hi]`. `lo` is the larger of the channel and
/// backhaul counting bounds and the fleet-count relaxation; `hi` is the
/// smallest of the greedy cover, the relaxation's cover when it admits
/// common altitudes, and the candidate count. Feasibility is monotone in the fleet
/// size because an extra FBS can always hover empty at the lowest altitude.
/// With a per-solve time or node limit, a probe that times out with a solution counts
/// as feasible and one that times out empty counts as infeasible, so the
/// returned size is then an upper bound rather than the proven minimum.
pub fn min_fbs_count(inst: &PlacementInstance) -> Result<(usize, PlacementSolution)> {
    let ni = inst.num_candidates();
    let nu = inst.num_users();
    if (0..nu).any(|j| !(0..ni).any(|i| inst.eligible(i, j))) {
        return Err(Error::NoFeasibleFleet(ni));
    }
    let limit = inst.params.time_limit.map(Duration::from_secs_f64);
    let demand: f64 = inst.demands.iter().sum();
    let mut lo = 1usize
        .max(nu.div_ceil(inst.params.psi))
        .max((demand / inst.params.backhaul_rate - 1e-9).ceil() as usize);
    let mut known: BTreeMap<usize, PlacementSolution> = BTreeMap::new();
    let greedy = greedy_placement(inst, None);
    let mut hi = greedy.as_ref().map_or(ni, |s| s.fbs_count());
    if let Some(g) = greedy {
        known.insert(g.fbs_count(), g);
    }
    let cb = count_bound(inst, limit).ok_or(Error::NoFeasibleFleet(ni))?;
    lo = lo.max(cb.lower);
    if let Some(c) = cb.cover {
        hi = hi.min(c.fbs_count());
        known.insert(c.fbs_count(), c);
    }
    if lo > ni {
        return Err(Error::NoFeasibleFleet(ni));
    }
    hi = hi.max(lo);
    let mut cache: BTreeMap<usize, SolveOutcome> = BTreeMap::new();
    let mut probe = |p: usize| -> bool {
        let out = cache
            .entry(p)
            .or_insert_with(|| solve_from(inst, p, limit, known.get(&p).cloned()));
        out.solution().is_some()
    };
    if !probe(hi) {
        if hi == ni || !probe(ni) {
            return Err(Error::NoFeasibleFleet(ni));
        }
        hi = ni;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if probe(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let sol = cache
        .get(&hi)
        .and_then(|o| o.solution().cloned())
        .ok_or(Error::NoFeasibleFleet(ni))?;
    Ok((hi, sol))
}
