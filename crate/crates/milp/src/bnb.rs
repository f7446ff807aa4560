//! Best-first branch-and-bound with depth-first plunging.
//!
//! Each node is the root model plus a list of tightened integer bounds. After
//! a node is solved and branched, the child on the rounding side is solved
//! next straight from the parent's final basis; the sibling goes to the heap
//! with a shared snapshot of that basis. Branching picks the lowest branch
//! class first and the most fractional variable inside it, lower index on
//! ties. Among incumbents with equal objective (within the gap tolerance) the
//! lexicographically smaller vector of integer values is kept.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::model::Model;
use crate::simplex::{Basis, DualSimplex, LpStatus};

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub int_tol: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            time_limit: None,
            node_limit: None,
            int_tol: 1e-6,
            abs_gap: 1e-9,
            rel_gap: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    /// Search completed; the incumbent is optimal.
    Optimal,
    /// Search completed without any integer-feasible point.
    Infeasible,
    /// Time or node limit hit, or an LP could not be solved reliably. The
    /// incumbent, if any, is feasible but not proven optimal.
    Incomplete,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    pub best_bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
}

struct Node {
    bound: f64,
    depth: usize,
    seq: u64,
    fixes: Vec<(usize, f64, f64)>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap pops the maximum, so smaller bounds must compare greater.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    x: Vec<f64>,
    obj: f64,
    key: Vec<u8>,
}

fn integer_key(model: &Model, x: &[f64]) -> Vec<u8> {
    model
        .vars
        .iter()
        .zip(x)
        .filter(|(v, _)| v.integer)
        .map(|(_, xi)| xi.round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Minimizes `model` over its integer variables. `start` is an optional
/// feasible point used as the first incumbent; it is ignored if it violates
/// the model by more than `1e-6` or is not integral.
pub fn branch_and_bound(model: &Model, opts: &BnbOptions, start: Option<&[f64]>) -> BnbResult {
    let t0 = Instant::now();
    let deadline = opts.time_limit.map(|d| t0 + d);
    let mut solver = DualSimplex::new(model);
    let root_bounds: Vec<(f64, f64)> = model.vars.iter().map(|v| (v.lb, v.ub)).collect();
    let mut incumbent: Option<Incumbent> = None;
    if let Some(x) = start {
        let integral = model
            .vars
            .iter()
            .zip(x)
            .all(|(v, xi)| !v.integer || (xi - xi.round()).abs() <= opts.int_tol);
        if x.len() == model.vars.len() && integral && model.max_violation(x) <= 1e-6 {
            incumbent = Some(Incumbent {
                x: x.to_vec(),
                obj: model.objective(x),
                key: integer_key(model, x),
            });
        }
    }
    let gap = |obj: f64| opts.abs_gap.max(opts.rel_gap * obj.abs());
    let cutoff = |inc: &Option<Incumbent>| match inc {
        Some(i) => i.obj - gap(i.obj),
        None => f64::INFINITY,
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut current = Some((
        Node {
            bound: f64::NEG_INFINITY,
            depth: 0,
            seq,
            fixes: Vec::new(),
            basis: None,
        },
        true,
    ));
    let mut applied: Vec<usize> = Vec::new();
    let mut nodes = 0usize;
    let mut complete = true;
    // Bounds of nodes abandoned on numerical trouble keep best_bound valid.
    let mut lost_bound = f64::INFINITY;

    loop {
        let (node, warm) = match current.take() {
            Some(c) => c,
            None => match heap.pop() {
                Some(n) => (n, false),
                None => break,
            },
        };
        if node.bound >= cutoff(&incumbent) {
            continue;
        }
        if let Some(dl) = deadline {
            if Instant::now() >= dl {
                heap.push(node);
                complete = false;
                break;
            }
        }
        if let Some(limit) = opts.node_limit {
            if nodes >= limit {
                heap.push(node);
                complete = false;
                break;
            }
        }
        nodes += 1;

        for &j in &applied {
            solver.set_bounds(j, root_bounds[j].0, root_bounds[j].1);
        }
        applied.clear();
        for &(j, l, u) in &node.fixes {
            solver.set_bounds(j, l, u);
            applied.push(j);
        }
        if !warm {
            if let Some(b) = &node.basis {
                solver.set_basis(b);
            }
        }
        match solver.solve(deadline) {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::TimeLimit => {
                heap.push(node);
                complete = false;
                break;
            }
            LpStatus::IterationLimit | LpStatus::Numerical => {
                complete = false;
                lost_bound = lost_bound.min(node.bound);
                continue;
            }
        }
        let obj = solver.objective();
        if obj >= cutoff(&incumbent) {
            continue;
        }
        let x = solver.x();
        let mut branch: Option<(u8, f64, usize)> = None;
        for (j, v) in model.vars.iter().enumerate() {
            let Some(class) = v.branch_class else {
                continue;
            };
            if !v.integer {
                continue;
            }
            let frac = x[j] - x[j].floor();
            if frac <= opts.int_tol || frac >= 1.0 - opts.int_tol {
                continue;
            }
            let score = (frac - 0.5).abs();
            let better = match branch {
                None => true,
                Some((c, s, _)) => class < c || (class == c && score < s),
            };
            if better {
                branch = Some((class, score, j));
            }
        }
        // Integer variables without a branch class must still be integral.
        let stray = model.vars.iter().enumerate().any(|(j, v)| {
            v.integer && v.branch_class.is_none() && (x[j] - x[j].round()).abs() > opts.int_tol
        });
        match branch {
            None if !stray => {
                let mut xi = x.to_vec();
                for (j, v) in model.vars.iter().enumerate() {
                    if v.integer {
                        xi[j] = xi[j].round();
                    }
                }
                let key = integer_key(model, &xi);
                let take = match &incumbent {
                    None => true,
                    Some(inc) => {
                        obj < inc.obj - gap(inc.obj)
                            || (obj <= inc.obj + gap(inc.obj) && key < inc.key)
                    }
                };
                if take {
                    incumbent = Some(Incumbent { x: xi, obj, key });
                }
            }
            None => {
                complete = false;
            }
            Some((_, _, j)) => {
                let v = x[j];
                let basis = Rc::new(solver.basis());
                let (lo, hi) = solver.bounds(j);
                let mut down = node.fixes.clone();
                down.push((j, lo, v.floor()));
                let mut up = node.fixes;
                up.push((j, v.ceil(), hi));
                let up_first = v - v.floor() >= 0.5;
                let (first, second) = if up_first { (up, down) } else { (down, up) };
                seq += 1;
                heap.push(Node {
                    bound: obj,
                    depth: node.depth + 1,
                    seq,
                    fixes: second,
                    basis: Some(basis),
                });
                seq += 1;
                current = Some((
                    Node {
                        bound: obj,
                        depth: node.depth + 1,
                        seq,
                        fixes: first,
                        basis: None,
                    },
                    true,
                ));
            }
        }
    }

    let open_bound = heap
        .iter()
        .map(|n| n.bound)
        .chain(current.iter().map(|(n, _)| n.bound))
        .fold(lost_bound, f64::min);
    let (status, x, objective) = match incumbent {
        Some(inc) => {
            let st = if complete && heap.is_empty() {
                BnbStatus::Optimal
            } else {
                BnbStatus::Incomplete
            };
            (st, Some(inc.x), inc.obj)
        }
        None => {
            let st = if complete && heap.is_empty() {
                BnbStatus::Infeasible
            } else {
                BnbStatus::Incomplete
            };
            (st, None, f64::INFINITY)
        }
    };
    BnbResult {
        status,
        x,
        objective,
        best_bound: open_bound.min(objective),
        nodes,
        lp_iterations: solver.iterations,
    }
}
