//! Bounded dual simplex.
//!
//! Each row `i` gets a logical variable `s_i = a_i . x`, so the constraint
//! matrix is `[A  -I]` and the row bounds become bounds on `s_i`. Every
//! variable, structural or logical, is boxed, which keeps any basis dual
//! feasible after bound flips and removes the need for a phase one.
//!
//! The basis inverse is stored in kernel form. With `S` the basic structural
//! columns and `R` the rows whose logical is nonbasic (`|S| = |R|`), the basis
//! is a permutation of `[[K, 0], [A_LS, -I]]` with `K = A[R, S]`, so only
//! `K^-1` is held. The four pivot kinds (structural or logical entering,
//! structural or logical leaving) each map to a rank-one update, a bordering
//! or a deflation of `K^-1`.

use std::time::Instant;

use crate::model::Model;

const NONE: usize = usize::MAX;
const TOL_PRIMAL: f64 = 1e-9;
const TOL_DUAL: f64 = 1e-9;
const TOL_PIVOT: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarState {
    Basic,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    IterationLimit,
    Numerical,
}

/// Snapshot of variable states, enough to warm start a later solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    states: Vec<VarState>,
}

pub struct DualSimplex {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    row_scale: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    state: Vec<VarState>,
    s_list: Vec<usize>,
    r_list: Vec<usize>,
    s_pos: Vec<usize>,
    r_pos: Vec<usize>,
    kinv: Vec<Vec<f64>>,
    since_refactor: usize,
    primal_dirty: bool,
    pub iterations: usize,
    pub max_iterations: usize,
}

impl DualSimplex {
    /// Builds the solver from a validated model. Rows are equilibrated so the
    /// largest coefficient in each is one; infinite row sides are replaced by
    /// the activity range implied by the variable bounds.
    pub fn new(model: &Model) -> Self {
        let n = model.vars.len();
        let m = model.rows.len();
        let mut cols = vec![Vec::new(); n];
        let mut rows = Vec::with_capacity(m);
        let mut row_scale = Vec::with_capacity(m);
        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        for v in &model.vars {
            lo.push(v.lb);
            hi.push(v.ub);
        }
        let mut rlo = Vec::with_capacity(m);
        let mut rhi = Vec::with_capacity(m);
        for (i, r) in model.rows.iter().enumerate() {
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(r.coefs.len());
            let mut sorted = r.coefs.clone();
            sorted.sort_by_key(|&(j, _)| j);
            for (j, a) in sorted {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            let big = merged.iter().fold(0.0f64, |acc, &(_, a)| acc.max(a.abs()));
            let f = if big > 0.0 { 1.0 / big } else { 1.0 };
            let mut amin = 0.0;
            let mut amax = 0.0;
            for &(j, a) in &merged {
                let (p, q) = (a * model.vars[j].lb, a * model.vars[j].ub);
                amin += p.min(q);
                amax += p.max(q);
            }
            let mut l = if r.lo.is_finite() { r.lo } else { amin - 1.0 };
            let mut h = if r.hi.is_finite() { r.hi } else { amax + 1.0 };
            if !r.lo.is_finite() {
                l = l.min(h);
            }
            if !r.hi.is_finite() {
                h = h.max(l);
            }
            let scaled: Vec<(usize, f64)> = merged.iter().map(|&(j, a)| (j, a * f)).collect();
            for &(j, a) in &scaled {
                cols[j].push((i, a));
            }
            rows.push(scaled);
            row_scale.push(f);
            rlo.push(l * f);
            rhi.push(h * f);
        }
        lo.extend(rlo);
        hi.extend(rhi);
        let cost: Vec<f64> = model.vars.iter().map(|v| v.obj).collect();
        let mut s = DualSimplex {
            n,
            m,
            cols,
            rows,
            row_scale,
            cost,
            lo,
            hi,
            x: vec![0.0; n + m],
            d: vec![0.0; n + m],
            state: vec![VarState::Lower; n + m],
            s_list: Vec::new(),
            r_list: Vec::new(),
            s_pos: vec![NONE; n],
            r_pos: vec![NONE; m],
            kinv: Vec::new(),
            since_refactor: 0,
            primal_dirty: true,
            iterations: 0,
            max_iterations: 50 * (n + m) + 1000,
        };
        s.slack_basis();
        s
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    fn slack_basis(&mut self) {
        for j in 0..self.n {
            self.state[j] = if self.cost[j] >= 0.0 {
                VarState::Lower
            } else {
                VarState::Upper
            };
        }
        for i in 0..self.m {
            self.state[self.n + i] = VarState::Basic;
        }
        self.rebuild_lists();
        self.kinv.clear();
        self.since_refactor = 0;
        self.recompute_primal();
        self.recompute_duals();
    }

    fn rebuild_lists(&mut self) {
        self.s_list.clear();
        self.r_list.clear();
        self.s_pos.iter_mut().for_each(|p| *p = NONE);
        self.r_pos.iter_mut().for_each(|p| *p = NONE);
        for j in 0..self.n {
            if self.state[j] == VarState::Basic {
                self.s_pos[j] = self.s_list.len();
                self.s_list.push(j);
            }
        }
        for i in 0..self.m {
            if self.state[self.n + i] != VarState::Basic {
                self.r_pos[i] = self.r_list.len();
                self.r_list.push(i);
            }
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    /// Changes the bounds of structural variable `j`.
    pub fn set_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        assert!(j < self.n);
        if self.lo[j] == lb && self.hi[j] == ub {
            return;
        }
        self.lo[j] = lb;
        self.hi[j] = ub;
        match self.state[j] {
            VarState::Lower => self.x[j] = lb,
            VarState::Upper => self.x[j] = ub,
            VarState::Basic => {}
        }
        self.primal_dirty = true;
    }

    pub fn basis(&self) -> Basis {
        Basis {
            states: self.state.clone(),
        }
    }

    /// Restores a basis captured with [`DualSimplex::basis`]. Falls back to the
    /// slack basis if the stored one is singular under the current data.
    pub fn set_basis(&mut self, basis: &Basis) {
        assert_eq!(basis.states.len(), self.n + self.m);
        self.state.copy_from_slice(&basis.states);
        self.rebuild_lists();
        if self.s_list.len() != self.r_list.len() || !self.refactor() {
            self.slack_basis();
            return;
        }
        self.recompute_primal();
        self.recompute_duals();
    }

    /// Structural part of the current primal point.
    pub fn x(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    /// Row duals in the caller's (unscaled) row units.
    pub fn row_duals(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (b, &i) in self.r_list.iter().enumerate() {
            let mut acc = 0.0;
            for (a, &s) in self.s_list.iter().enumerate() {
                acc += self.cost[s] * self.kinv[a][b];
            }
            y[i] = acc * self.row_scale[i];
        }
        y
    }

    /// Reduced costs of the structural columns.
    pub fn reduced_costs(&self) -> &[f64] {
        &self.d[..self.n]
    }

    fn refactor(&mut self) -> bool {
        let k = self.s_list.len();
        let mut a = vec![vec![0.0; 2 * k]; k];
        for (c, &s) in self.s_list.iter().enumerate() {
            for &(i, v) in &self.cols[s] {
                let b = self.r_pos[i];
                if b != NONE {
                    a[b][c] = v;
                }
            }
        }
        for (r, row) in a.iter_mut().enumerate() {
            row[k + r] = 1.0;
        }
        for col in 0..k {
            let mut piv = col;
            let mut best = a[col][col].abs();
            for (r, row) in a.iter().enumerate().skip(col + 1) {
                if row[col].abs() > best {
                    best = row[col].abs();
                    piv = r;
                }
            }
            if best < 1e-12 {
                return false;
            }
            a.swap(col, piv);
            let inv = 1.0 / a[col][col];
            for v in a[col].iter_mut() {
                *v *= inv;
            }
            let pivot_row = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r == col {
                    continue;
                }
                let f = row[col];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        // `a` now holds [I | K^-1] with K^-1 rows over S and columns over R.
        self.kinv = a.into_iter().map(|row| row[k..].to_vec()).collect();
        self.since_refactor = 0;
        true
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Upper => self.hi[j],
            _ => self.lo[j],
        }
    }

    fn recompute_primal(&mut self) {
        for j in 0..self.n + self.m {
            if self.state[j] != VarState::Basic {
                self.x[j] = self.nonbasic_value(j);
            }
        }
        let k = self.s_list.len();
        let mut v = vec![0.0; k];
        for (b, &i) in self.r_list.iter().enumerate() {
            let mut acc = self.x[self.n + i];
            for &(j, a) in &self.rows[i] {
                if self.state[j] != VarState::Basic {
                    acc -= a * self.x[j];
                }
            }
            v[b] = acc;
        }
        for a in 0..k {
            let row = &self.kinv[a];
            let val: f64 = row.iter().zip(&v).map(|(p, q)| p * q).sum();
            self.x[self.s_list[a]] = val;
        }
        for i in 0..self.m {
            if self.state[self.n + i] == VarState::Basic {
                self.x[self.n + i] = self.rows[i].iter().map(|&(j, a)| a * self.x[j]).sum();
            }
        }
        self.primal_dirty = false;
    }

    fn recompute_duals(&mut self) {
        let mut y = vec![0.0; self.m];
        for (b, &i) in self.r_list.iter().enumerate() {
            let mut acc = 0.0;
            for (a, &s) in self.s_list.iter().enumerate() {
                acc += self.cost[s] * self.kinv[a][b];
            }
            y[i] = acc;
        }
        for j in 0..self.n {
            self.d[j] = if self.state[j] == VarState::Basic {
                0.0
            } else {
                self.cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
            };
        }
        for i in 0..self.m {
            self.d[self.n + i] = if self.state[self.n + i] == VarState::Basic {
                0.0
            } else {
                y[i]
            };
        }
    }

    /// Flips nonbasic variables whose reduced cost has the wrong sign.
    /// Returns true if anything moved.
    fn restore_dual_feasibility(&mut self) -> bool {
        let mut moved = false;
        for j in 0..self.n + self.m {
            if self.lo[j] == self.hi[j] {
                continue;
            }
            match self.state[j] {
                VarState::Lower if self.d[j] < -TOL_DUAL => {
                    self.state[j] = VarState::Upper;
                    moved = true;
                }
                VarState::Upper if self.d[j] > TOL_DUAL => {
                    self.state[j] = VarState::Lower;
                    moved = true;
                }
                _ => {}
            }
        }
        if moved {
            self.primal_dirty = true;
        }
        moved
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        let tl = TOL_PRIMAL * (1.0 + self.lo[j].abs());
        let th = TOL_PRIMAL * (1.0 + self.hi[j].abs());
        if x < self.lo[j] - tl {
            self.lo[j] - x
        } else if x > self.hi[j] + th {
            x - self.hi[j]
        } else {
            0.0
        }
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let mut best = None;
        let mut best_val = 0.0;
        let mut consider = |j: usize, best: &mut Option<usize>| {
            let inf = self.infeasibility(j);
            if inf > 0.0 {
                if bland {
                    if best.is_none_or(|b| j < b) {
                        *best = Some(j);
                    }
                } else if inf > best_val {
                    best_val = inf;
                    *best = Some(j);
                }
            }
        };
        for &s in &self.s_list {
            consider(s, &mut best);
        }
        for i in 0..self.m {
            if self.state[self.n + i] == VarState::Basic {
                consider(self.n + i, &mut best);
            }
        }
        best
    }

    /// Row of the basis inverse belonging to basic variable `p`, scattered over
    /// all rows, plus its restriction `z` to the kernel rows when `p` is a
    /// logical.
    fn btran(&self, p: usize) -> (Vec<f64>, Vec<f64>) {
        let k = self.s_list.len();
        let mut rho = vec![0.0; self.m];
        let mut z = vec![0.0; k];
        if p < self.n {
            let a = self.s_pos[p];
            for (b, &i) in self.r_list.iter().enumerate() {
                rho[i] = self.kinv[a][b];
            }
        } else {
            let l = p - self.n;
            for &(s, v) in &self.rows[l] {
                let a = self.s_pos[s];
                if a != NONE {
                    for (zb, kv) in z.iter_mut().zip(&self.kinv[a]) {
                        *zb += v * kv;
                    }
                }
            }
            for (b, &i) in self.r_list.iter().enumerate() {
                rho[i] = z[b];
            }
            rho[l] = -1.0;
        }
        (rho, z)
    }

    fn alpha(&self, rho: &[f64], j: usize) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, a)| rho[i] * a).sum()
        } else {
            -rho[j - self.n]
        }
    }

    /// Basis-inverse image of the column of `q`: `u` over S, `w` over rows
    /// (meaningful for basic logicals only).
    fn ftran(&self, q: usize) -> (Vec<f64>, Vec<f64>) {
        let k = self.s_list.len();
        let mut u = vec![0.0; k];
        if q < self.n {
            for &(i, v) in &self.cols[q] {
                let b = self.r_pos[i];
                if b != NONE {
                    for (ua, row) in u.iter_mut().zip(&self.kinv) {
                        *ua += row[b] * v;
                    }
                }
            }
        } else {
            let b = self.r_pos[q - self.n];
            for (ua, row) in u.iter_mut().zip(&self.kinv) {
                *ua = -row[b];
            }
        }
        let mut w = vec![0.0; self.m];
        for (a, &s) in self.s_list.iter().enumerate() {
            let ua = u[a];
            if ua != 0.0 {
                for &(i, v) in &self.cols[s] {
                    w[i] += v * ua;
                }
            }
        }
        if q < self.n {
            for &(i, v) in &self.cols[q] {
                w[i] -= v;
            }
        }
        (u, w)
    }

    /// Runs the dual simplex from the current basis.
    pub fn solve(&mut self, deadline: Option<Instant>) -> LpStatus {
        if self.primal_dirty {
            self.recompute_primal();
        }
        if self.restore_dual_feasibility() {
            self.recompute_primal();
        }
        let start_iter = self.iterations;
        let mut degenerate_run = 0usize;
        let mut retried = false;
        loop {
            if self.iterations - start_iter > self.max_iterations {
                return LpStatus::IterationLimit;
            }
            if self.iterations % 16 == 0 {
                if let Some(dl) = deadline {
                    if Instant::now() >= dl {
                        return LpStatus::TimeLimit;
                    }
                }
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.reset_factorization();
            }
            let bland = degenerate_run > 50;
            let p = match self.choose_leaving(bland) {
                Some(p) => p,
                None => {
                    if self.since_refactor > 0 {
                        self.reset_factorization();
                        if self.choose_leaving(false).is_some() {
                            continue;
                        }
                    }
                    return LpStatus::Optimal;
                }
            };
            let to_lower = self.x[p] < self.lo[p];
            let (rho, z) = self.btran(p);
            let sgn = if to_lower { 1.0 } else { -1.0 };

            // Harris two-pass ratio test over nonbasic columns.
            let mut alpha = vec![0.0; self.n + self.m];
            let mut cands: Vec<(usize, f64)> = Vec::new();
            let mut bound = f64::INFINITY;
            for j in 0..self.n + self.m {
                let st = self.state[j];
                if st == VarState::Basic {
                    continue;
                }
                let al = self.alpha(&rho, j);
                alpha[j] = al;
                if self.lo[j] == self.hi[j] {
                    continue;
                }
                let at = sgn * al;
                let dj = match st {
                    VarState::Lower if at < -TOL_PIVOT => self.d[j].max(0.0),
                    VarState::Upper if at > TOL_PIVOT => (-self.d[j]).max(0.0),
                    _ => continue,
                };
                bound = bound.min((dj + TOL_DUAL) / al.abs());
                cands.push((j, dj));
            }
            if cands.is_empty() {
                if self.certify_infeasible(p, &alpha, to_lower) {
                    return LpStatus::Infeasible;
                }
                if retried {
                    return LpStatus::Numerical;
                }
                retried = true;
                self.reset_factorization();
                continue;
            }
            let mut q = NONE;
            if bland {
                let mut best_ratio = f64::INFINITY;
                for &(j, dj) in &cands {
                    let r = dj / alpha[j].abs();
                    if r < best_ratio - 1e-12 {
                        best_ratio = r;
                        q = j;
                    }
                }
            } else {
                let mut best_abs = 0.0;
                for &(j, dj) in &cands {
                    let al = alpha[j].abs();
                    if dj / al <= bound && al > best_abs {
                        best_abs = al;
                        q = j;
                    }
                }
            }
            let q_alpha = alpha[q];
            let (u, w) = self.ftran(q);
            let pivot = if p < self.n {
                u[self.s_pos[p]]
            } else {
                w[p - self.n]
            };
            if (pivot - q_alpha).abs() > 1e-6 * (1.0 + pivot.abs()) || pivot.abs() < 1e-13 {
                if retried {
                    return LpStatus::Numerical;
                }
                retried = true;
                self.reset_factorization();
                continue;
            }
            retried = false;

            // Dual step.
            let mut dq = self.d[q];
            match self.state[q] {
                VarState::Lower if dq < 0.0 => dq = 0.0,
                VarState::Upper if dq > 0.0 => dq = 0.0,
                _ => {}
            }
            let theta = dq / pivot;
            if theta == 0.0 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            if theta != 0.0 {
                for (j, al) in alpha.iter().enumerate() {
                    if *al != 0.0 && self.state[j] != VarState::Basic {
                        self.d[j] -= theta * al;
                    }
                }
            }
            self.d[q] = 0.0;
            self.d[p] = -theta;

            // Primal step.
            let target = if to_lower { self.lo[p] } else { self.hi[p] };
            let dx = (self.x[p] - target) / pivot;
            for (a, &s) in self.s_list.iter().enumerate() {
                self.x[s] -= u[a] * dx;
            }
            for i in 0..self.m {
                if self.state[self.n + i] == VarState::Basic {
                    self.x[self.n + i] -= w[i] * dx;
                }
            }
            self.x[q] += dx;
            self.x[p] = target;

            self.update_kernel(p, q, &u, &w, &z);
            self.state[q] = VarState::Basic;
            self.state[p] = if to_lower {
                VarState::Lower
            } else {
                VarState::Upper
            };
            self.iterations += 1;
            self.since_refactor += 1;
        }
    }

    fn reset_factorization(&mut self) {
        if !self.refactor() {
            self.slack_basis();
        }
        self.recompute_primal();
        self.recompute_duals();
        if self.restore_dual_feasibility() {
            self.recompute_primal();
        }
    }

    fn certify_infeasible(&self, p: usize, alpha: &[f64], to_lower: bool) -> bool {
        // x_p = -sum_j alpha_j x_j over nonbasic j; bound its range.
        let mut lo_sum = 0.0;
        let mut hi_sum = 0.0;
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let al = alpha[j];
            let (a, b) = (-al * self.lo[j], -al * self.hi[j]);
            lo_sum += a.min(b);
            hi_sum += a.max(b);
        }
        if to_lower {
            hi_sum < self.lo[p] - 1e-7 * (1.0 + self.lo[p].abs())
        } else {
            lo_sum > self.hi[p] + 1e-7 * (1.0 + self.hi[p].abs())
        }
    }

    fn update_kernel(&mut self, p: usize, q: usize, u: &[f64], w: &[f64], z: &[f64]) {
        let n = self.n;
        match (q < n, p < n) {
            (true, true) => {
                let a = self.s_pos[p];
                let piv = u[a];
                let prow: Vec<f64> = self.kinv[a].iter().map(|v| v / piv).collect();
                for (t, row) in self.kinv.iter_mut().enumerate() {
                    if t == a {
                        continue;
                    }
                    let f = u[t];
                    if f != 0.0 {
                        for (v, pv) in row.iter_mut().zip(&prow) {
                            *v -= f * pv;
                        }
                    }
                }
                self.kinv[a] = prow;
                self.s_list[a] = q;
                self.s_pos[q] = a;
                self.s_pos[p] = NONE;
            }
            (true, false) => {
                let l = p - n;
                let sc = -w[l];
                let k = self.s_list.len();
                for (a, row) in self.kinv.iter_mut().enumerate() {
                    let f = u[a] / sc;
                    if f != 0.0 {
                        for (v, zb) in row.iter_mut().zip(z) {
                            *v += f * zb;
                        }
                    }
                    row.push(-u[a] / sc);
                }
                let mut newrow: Vec<f64> = z.iter().map(|zb| -zb / sc).collect();
                newrow.push(1.0 / sc);
                self.kinv.push(newrow);
                self.s_pos[q] = k;
                self.s_list.push(q);
                self.r_pos[l] = k;
                self.r_list.push(l);
            }
            (false, true) => {
                let i = q - n;
                let a = self.s_pos[p];
                let b = self.r_pos[i];
                let h = self.kinv[a][b];
                let arow = self.kinv[a].clone();
                for (t, row) in self.kinv.iter_mut().enumerate() {
                    if t == a {
                        continue;
                    }
                    let f = row[b] / h;
                    if f != 0.0 {
                        for (v, av) in row.iter_mut().zip(&arow) {
                            *v -= f * av;
                        }
                    }
                }
                self.kinv.swap_remove(a);
                self.s_list.swap_remove(a);
                self.s_pos[p] = NONE;
                if a < self.s_list.len() {
                    self.s_pos[self.s_list[a]] = a;
                }
                for row in self.kinv.iter_mut() {
                    row.swap_remove(b);
                }
                self.r_list.swap_remove(b);
                self.r_pos[i] = NONE;
                if b < self.r_list.len() {
                    self.r_pos[self.r_list[b]] = b;
                }
            }
            (false, false) => {
                let i = q - n;
                let l = p - n;
                let b = self.r_pos[i];
                let zb = z[b];
                for row in self.kinv.iter_mut() {
                    let nb = row[b] / zb;
                    for (c, v) in row.iter_mut().enumerate() {
                        if c != b {
                            *v -= z[c] * nb;
                        }
                    }
                    row[b] = nb;
                }
                self.r_list[b] = l;
                self.r_pos[l] = b;
                self.r_pos[i] = NONE;
            }
        }
    }
}

/// Result of a one-shot LP solve.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Solves the continuous relaxation of `model` from the slack basis.
pub fn solve_lp(model: &Model) -> LpSolution {
    let mut s = DualSimplex::new(model);
    let status = s.solve(None);
    LpSolution {
        status,
        x: s.x().to_vec(),
        objective: s.objective(),
    }
}
