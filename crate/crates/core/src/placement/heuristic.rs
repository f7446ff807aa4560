use super::{PlacementInstance, PlacementSolution};

struct Open {
    users: Vec<usize>,
    lo: f64,
    hi: f64,
    load: f64,
}

impl Open {
    fn empty(inst: &PlacementInstance) -> Open {
        Open {
            users: Vec::new(),
            lo: inst.params.h_min,
            hi: inst.params.h_max,
            load: 0.0,
        }
    }

    fn accepts(&self, inst: &PlacementInstance, i: usize, j: usize) -> bool {
        if !inst.eligible(i, j) || self.users.len() >= inst.params.psi {
            return false;
        }
        if self.load + inst.demands[j] > inst.params.backhaul_rate {
            return false;
        }
        let (a, b) = inst.altitude_window(i, j);
        self.lo.max(a) <= self.hi.min(b)
    }

    fn push(&mut self, inst: &PlacementInstance, i: usize, j: usize) {
        let (a, b) = inst.altitude_window(i, j);
        self.lo = self.lo.max(a);
        self.hi = self.hi.min(b);
        self.load += inst.demands[j];
        self.users.push(j);
    }

    fn rebuild(inst: &PlacementInstance, i: usize, users: &[usize]) -> Open {
        let mut o = Open::empty(inst);
        for &j in users {
            o.push(inst, i, j);
        }
        o
    }
}

/// Greedy cover followed by facility removal and single-user moves.
///
/// Candidates are opened one at a time, each time the one that can absorb
/// the most uncovered users when filled nearest-first. With `target`, the
/// open set is padded with unused candidates (lowest id first) to exactly
/// `target` FBSs, and `None` is returned if the cover needs more.
pub fn greedy_placement(
    inst: &PlacementInstance,
    target: Option<usize>,
) -> Option<PlacementSolution> {
    let (ni, nu) = (inst.num_candidates(), inst.num_users());
    let mut near: Vec<Vec<usize>> = Vec::with_capacity(ni);
    for i in 0..ni {
        let mut js: Vec<usize> = (0..nu).filter(|&j| inst.eligible(i, j)).collect();
        js.sort_by(|&a, &b| {
            inst.pairs[i][a]
                .r
                .total_cmp(&inst.pairs[i][b].r)
                .then(a.cmp(&b))
        });
        near.push(js);
    }
    let mut facilities: Vec<Option<Open>> = (0..ni).map(|_| None).collect();
    let mut owner: Vec<Option<usize>> = vec![None; nu];
    let mut uncovered = nu;

    while uncovered > 0 {
        let mut best: Option<(usize, Open)> = None;
        for i in 0..ni {
            if facilities[i].is_some() {
                continue;
            }
            let mut o = Open::empty(inst);
            for &j in &near[i] {
                if owner[j].is_none() && o.accepts(inst, i, j) {
                    o.push(inst, i, j);
                }
            }
            if !o.users.is_empty()
                && best
                    .as_ref()
                    .map_or(true, |(_, b)| o.users.len() > b.users.len())
            {
                best = Some((i, o));
            }
        }
        let (i, o) = best?;
        for &j in &o.users {
            owner[j] = Some(i);
        }
        uncovered -= o.users.len();
        facilities[i] = Some(o);
    }

    // Close facilities whose users all fit elsewhere, smallest first.
    let mut order: Vec<usize> = (0..ni).filter(|&i| facilities[i].is_some()).collect();
    order.sort_by_key(|&i| (facilities[i].as_ref().map_or(0, |o| o.users.len()), i));
    for i in order {
        let Some(victim) = facilities[i].take() else {
            continue;
        };
        let mut moved: Vec<(usize, usize)> = Vec::new();
        let mut ok = true;
        for &j in &victim.users {
            let dest = (0..ni).find(|&k| {
                facilities[k]
                    .as_ref()
                    .is_some_and(|o| o.accepts(inst, k, j))
            });
            match dest {
                Some(k) => {
                    facilities[k].as_mut().unwrap().push(inst, k, j);
                    moved.push((j, k));
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            for (j, k) in moved {
                owner[j] = Some(k);
            }
        } else {
            for (j, k) in moved {
                let o = facilities[k].as_mut().unwrap();
                o.users.retain(|&u| u != j);
                *o = Open::rebuild(inst, k, &o.users.clone());
            }
            facilities[i] = Some(victim);
        }
    }

    let count = facilities.iter().filter(|f| f.is_some()).count();
    if let Some(t) = target {
        if count > t || t > ni {
            return None;
        }
        for i in 0..ni {
            if facilities.iter().filter(|f| f.is_some()).count() >= t {
                break;
            }
            if facilities[i].is_none() {
                facilities[i] = Some(Open::empty(inst));
            }
        }
    }

    improve(inst, &mut facilities, &mut owner);

    let open: Vec<usize> = (0..ni).filter(|&i| facilities[i].is_some()).collect();
    let assignment: Vec<usize> = owner
        .iter()
        .map(|o| o.expect("every user covered"))
        .collect();
    inst.solution_from_assignment(&open, &assignment)
}

/// Runs the single-user improvement moves on a known solution.
pub(crate) fn polish(
    inst: &PlacementInstance,
    sol: &PlacementSolution,
) -> Option<PlacementSolution> {
    let mut facilities: Vec<Option<Open>> = (0..inst.num_candidates()).map(|_| None).collect();
    for &(i, _) in &sol.selected {
        let users: Vec<usize> = (0..sol.assignment.len())
            .filter(|&j| sol.assignment[j] == i)
            .collect();
        facilities[i] = Some(Open::rebuild(inst, i, &users));
    }
    let mut owner: Vec<Option<usize>> = sol.assignment.iter().map(|&i| Some(i)).collect();
    improve(inst, &mut facilities, &mut owner);
    let open: Vec<usize> = sol.selected.iter().map(|s| s.0).collect();
    let assignment: Vec<usize> = owner
        .iter()
        .map(|o| o.expect("every user covered"))
        .collect();
    inst.solution_from_assignment(&open, &assignment)
}

fn group_cost(inst: &PlacementInstance, i: usize, users: &[usize]) -> Option<f64> {
    inst.facility(i, users).map(|(_, c)| c)
}

/// Moves single users between open facilities while that lowers the cost.
fn improve(inst: &PlacementInstance, facilities: &mut [Option<Open>], owner: &mut [Option<usize>]) {
    let open: Vec<usize> = (0..facilities.len())
        .filter(|&i| facilities[i].is_some())
        .collect();
    for _ in 0..20 {
        let mut changed = false;
        for j in 0..owner.len() {
            let Some(cur) = owner[j] else { continue };
            let cur_users: Vec<usize> = facilities[cur].as_ref().unwrap().users.clone();
            let without: Vec<usize> = cur_users.iter().copied().filter(|&u| u != j).collect();
            let (Some(before_cur), Some(after_cur)) = (
                group_cost(inst, cur, &cur_users),
                group_cost(inst, cur, &without),
            ) else {
                continue;
            };
            let mut best: Option<(f64, usize)> = None;
            for &k in &open {
                if k == cur || !facilities[k].as_ref().unwrap().accepts(inst, k, j) {
                    continue;
                }
                let ku = &facilities[k].as_ref().unwrap().users;
                let mut with = ku.clone();
                with.push(j);
                let (Some(b), Some(a)) = (group_cost(inst, k, ku), group_cost(inst, k, &with))
                else {
                    continue;
                };
                let delta = (after_cur - before_cur) + (a - b);
                if delta < -1e-12 && best.map_or(true, |(d, _)| delta < d) {
                    best = Some((delta, k));
                }
            }
            if let Some((_, k)) = best {
                facilities[cur] = Some(Open::rebuild(inst, cur, &without));
                facilities[k].as_mut().unwrap().push(inst, k, j);
                owner[j] = Some(k);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}
