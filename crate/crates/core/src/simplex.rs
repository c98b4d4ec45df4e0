//! Bounded-variable primal simplex over a sparse LU-factorized basis with
//! product-form eta updates. Phase 1 drives a composite infeasibility sum
//! to zero; phase 2 optimizes the real objective. Used as the relaxation
//! engine inside branch-and-bound.

use serde::{Deserialize, Serialize};

use crate::model::{MilpModel, RowSense};

/// bound feasibility tolerance
pub const FEAS_TOL: f64 = 1e-7;
/// row residual tolerance for reported solutions
pub const ROW_TOL: f64 = 1e-6;
const DUAL_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-8;
/// entries of a solved column below this are treated as exact zeros, so the
/// ratio test and the value update agree on which basics move
const W_EPS: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 100;
const STALL_LIMIT: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// nonbasic free variable pinned at zero
    Free,
}

/// Warm-start descriptor: one status per variable (structurals then one
/// logical per row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis(pub Vec<VarStatus>);

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// structural column values
    pub values: Vec<f64>,
    pub basis: Basis,
    pub iterations: u64,
}

/// Compressed sparse columns of the structural part of the constraint
/// matrix; logical columns are implicit unit vectors.
#[derive(Debug, Clone)]
struct Csc {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Csc {
    fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |k| (self.row_idx[k], self.values[k]))
    }
}

/// A compiled LP: the model's rows in equality form with one logical
/// variable each. Bounds may be overridden per solve for branching.
#[derive(Debug, Clone)]
pub struct LpProblem {
    csc: Csc,
    obj: Vec<f64>,
    rhs: Vec<f64>,
    /// bounds over structurals then logicals
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub n_structural: usize,
    pub n_rows: usize,
}

impl LpProblem {
    pub fn from_model(model: &MilpModel) -> LpProblem {
        let n = model.columns.len();
        let m = model.rows.len();
        let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                entries[j].push((i, a));
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for col in &mut entries {
            col.sort_unstable_by_key(|&(i, _)| i);
            for &(i, a) in col.iter() {
                row_idx.push(i);
                values.push(a);
            }
            col_ptr.push(row_idx.len());
        }

        let mut lower: Vec<f64> = model.columns.iter().map(|c| c.lower).collect();
        let mut upper: Vec<f64> = model.columns.iter().map(|c| c.upper).collect();
        for row in &model.rows {
            let (lo, hi) = match row.sense {
                RowSense::Le => (0.0, f64::INFINITY),
                RowSense::Ge => (f64::NEG_INFINITY, 0.0),
                RowSense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
        }

        LpProblem {
            csc: Csc {
                col_ptr,
                row_idx,
                values,
            },
            obj: model.columns.iter().map(|c| c.objective).collect(),
            rhs: model.rows.iter().map(|r| r.rhs).collect(),
            lower,
            upper,
            n_structural: n,
            n_rows: m,
        }
    }

    fn total_vars(&self) -> usize {
        self.n_structural + self.n_rows
    }

    /// Column of the equality-form matrix, logicals included.
    fn column(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        if j < self.n_structural {
            out.extend(self.csc.col(j));
        } else {
            out.push((j - self.n_structural, 1.0));
        }
    }

    pub fn solve(
        &self,
        bounds: Option<(&[f64], &[f64])>,
        warm: Option<&Basis>,
        max_iters: u64,
    ) -> LpResult {
        let (lower, upper) = match bounds {
            Some((l, u)) => (l.to_vec(), u.to_vec()),
            None => (self.lower.clone(), self.upper.clone()),
        };
        let mut simplex = Simplex::new(self, lower, upper);
        simplex.run(warm, max_iters)
    }
}

/// Solves the LP relaxation of the model (integrality dropped).
pub fn solve_lp(model: &MilpModel, warm: Option<&Basis>) -> LpResult {
    LpProblem::from_model(model).solve(None, warm, default_iter_limit(model.rows.len()))
}

pub fn default_iter_limit(rows: usize) -> u64 {
    50_000 + 20 * rows as u64
}

struct LuFactors {
    /// pivot_row[t] = original row pivoted at position t
    pivot_row: Vec<usize>,
    /// L columns in original-row coordinates, unit diagonal implicit
    l_cols: Vec<Vec<(usize, f64)>>,
    /// U columns in pivot-position coordinates, diagonal separate
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
}

struct Eta {
    slot: usize,
    entries: Vec<(usize, f64)>,
    pivot_value: f64,
}

struct Simplex<'a> {
    p: &'a LpProblem,
    lower: Vec<f64>,
    upper: Vec<f64>,
    status: Vec<VarStatus>,
    /// variable occupying each basis slot
    basic: Vec<usize>,
    /// current values of every variable
    x: Vec<f64>,
    lu: Option<LuFactors>,
    etas: Vec<Eta>,
    /// scratch: row-coordinate and slot-coordinate dense vectors
    work_rows: Vec<f64>,
    work_slots: Vec<f64>,
    col_buf: Vec<(usize, f64)>,
    iterations: u64,
    bland: bool,
    stall: u32,
    restarts: u32,
}

impl<'a> Simplex<'a> {
    fn new(p: &'a LpProblem, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let m = p.n_rows;
        Simplex {
            p,
            lower,
            upper,
            status: Vec::new(),
            basic: Vec::new(),
            x: Vec::new(),
            lu: None,
            etas: Vec::new(),
            work_rows: vec![0.0; m],
            work_slots: vec![0.0; m],
            col_buf: Vec::new(),
            iterations: 0,
            bland: false,
            stall: 0,
            restarts: 0,
        }
    }

    fn run(&mut self, warm: Option<&Basis>, max_iters: u64) -> LpResult {
        for j in 0..self.p.total_vars() {
            if self.lower[j] > self.upper[j] + FEAS_TOL {
                return self.finish(LpStatus::Infeasible);
            }
        }
        self.install_basis(warm);
        if self.refactorize().is_err() {
            // Singular warm basis descriptor: restart from logicals.
            self.install_basis(None);
            if self.refactorize().is_err() {
                return self.finish(LpStatus::Infeasible);
            }
        }
        self.recompute_basics();

        // Phase 1: drive28 the infeasibility sum to zero.
        loop {
            if self.infeasibility() <= FEAS_TOL * (1.0 + self.p.n_rows as f64).sqrt() {
                break;
            }
            if self.iterations >= max_iters {
                return self.finish(LpStatus::IterationLimit);
            }
            match self.iterate(true) {
                StepOutcome::Moved => {}
                StepOutcome::NoEntering => {
                    return if self.infeasibility() <= 1e-5 {
                        // Numerically feasible enough to continue.
                        break;
                    } else {
                        self.finish(LpStatus::Infeasible)
                    };
                }
                StepOutcome::Unbounded => return self.finish(LpStatus::Infeasible),
                StepOutcome::NumericalRestart => {}
            }
        }

        // Phase 2: optimize the real objective.
        loop {
            if self.iterations >= max_iters {
                return self.finish(LpStatus::IterationLimit);
            }
            match self.iterate(false) {
                StepOutcome::Moved => {}
                StepOutcome::NoEntering => return self.polish_and_finish(),
                StepOutcome::Unbounded => return self.finish(LpStatus::Unbounded),
                StepOutcome::NumericalRestart => {}
            }
        }
    }

    fn install_basis(&mut self, warm: Option<&Basis>) {
        let total = self.p.total_vars();
        let m = self.p.n_rows;
        self.etas.clear();
        let from_warm = warm
            .filter(|b| b.0.len() == total && b.0.iter().filter(|s| **s == VarStatus::Basic).count() == m);
        self.status = match from_warm {
            Some(b) => b.0.clone(),
            None => {
                let mut s = vec![VarStatus::AtLower; total];
                for (j, st) in s.iter_mut().enumerate().take(self.p.n_structural) {
                    *st = self.nonbasic_rest_status(j);
                }
                for j in self.p.n_structural..total {
                    s[j] = VarStatus::Basic;
                }
                s
            }
        };
        self.basic = (0..total).filter(|&j| self.status[j] == VarStatus::Basic).collect();
        self.x = vec![0.0; total];
        for j in 0..total {
            self.x[j] = match self.status[j] {
                VarStatus::Basic => 0.0,
                other => self.nonbasic_value(j, other),
            };
        }
    }

    fn nonbasic_rest_status(&self, j: usize) -> VarStatus {
        if self.lower[j].is_finite() {
            VarStatus::AtLower
        } else if self.upper[j].is_finite() {
            VarStatus::AtUpper
        } else {
            VarStatus::Free
        }
    }

    fn nonbasic_value(&self, j: usize, status: VarStatus) -> f64 {
        match status {
            VarStatus::AtLower => {
                if self.lower[j].is_finite() {
                    self.lower[j]
                } else {
                    0.0
                }
            }
            VarStatus::AtUpper => {
                if self.upper[j].is_finite() {
                    self.upper[j]
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    /// Gilbert-Peierls style left-looking LU with partial pivoting over the
    /// current basic columns.
    fn refactorize(&mut self) -> Result<(), ()> {
        let m = self.p.n_rows;
        let mut lu = LuFactors {
            pivot_row: Vec::with_capacity(m),
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
        };
        // position of each original row once pivoted
        let mut row_pos = vec![usize::MAX; m];
        let work = &mut self.work_rows;
        work.iter_mut().for_each(|v| *v = 0.0);
        let mut touched: Vec<usize> = Vec::new();

        for k in 0..m {
            let var = self.basic[k];
            self.col_buf.clear();
            if var < self.p.n_structural {
                self.col_buf.extend(self.p.csc.col(var));
            } else {
                self.col_buf.push((var - self.p.n_structural, 1.0));
            }
            for &(i, v) in &self.col_buf {
                work[i] = v;
                touched.push(i);
            }
            // eliminate with existing pivots in order
            for t in 0..k {
                let pr = lu.pivot_row[t];
                let alpha = work[pr];
                if alpha == 0.0 {
                    continue;
                }
                for &(r, v) in &lu.l_cols[t] {
                    if work[r] == 0.0 {
                        touched.push(r);
                    }
                    work[r] -= alpha * v;
                }
            }
            // collect U entries (pivoted rows) and choose the new pivot
            let mut u_col = Vec::new();
            let mut best: Option<(usize, f64)> = None;
            touched.sort_unstable();
            touched.dedup();
            for &r in touched.iter() {
                let v = work[r];
                if v == 0.0 {
                    continue;
                }
                if row_pos[r] != usize::MAX {
                    u_col.push((row_pos[r], v));
                } else if best.map_or(true, |(_, bv)| v.abs() > bv.abs()) {
                    best = Some((r, v));
                }
            }
            let (pivot_r, pivot_v) = match best {
                Some((r, v)) if v.abs() > PIVOT_TOL => (r, v),
                _ => {
                    for &r in &touched {
                        work[r] = 0.0;
                    }
                    return Err(());
                }
            };
            let mut l_col = Vec::new();
            for &r in &touched {
                let v = work[r];
                if v != 0.0 && r != pivot_r && row_pos[r] == usize::MAX {
                    l_col.push((r, v / pivot_v));
                }
                work[r] = 0.0;
            }
            touched.clear();
            u_col.sort_unstable_by_key(|&(t, _)| t);
            row_pos[pivot_r] = k;
            lu.pivot_row.push(pivot_r);
            lu.l_cols.push(l_col);
            lu.u_cols.push(u_col);
            lu.u_diag.push(pivot_v);
        }
        self.lu = Some(lu);
        self.etas.clear();
        Ok(())
    }

    /// w = B^-1 a, result in slot coordinates (`work_slots`).
    fn ftran(&mut self, col: &[(usize, f64)]) {
        let lu = self.lu.as_ref().expect("factorized");
        let m = self.p.n_rows;
        let rows = &mut self.work_rows;
        rows.iter_mut().for_each(|v| *v = 0.0);
        for &(i, v) in col {
            rows[i] = v;
        }
        for t in 0..m {
            let alpha = rows[lu.pivot_row[t]];
            if alpha == 0.0 {
                continue;
            }
            for &(r, v) in &lu.l_cols[t] {
                rows[r] -= alpha * v;
            }
        }
        let slots = &mut self.work_slots;
        for t in 0..m {
            slots[t] = rows[lu.pivot_row[t]];
        }
        for k in (0..m).rev() {
            let v = slots[k];
            if v == 0.0 {
                continue;
            }
            let wk = v / lu.u_diag[k];
            slots[k] = wk;
            for &(t, uv) in &lu.u_cols[k] {
                slots[t] -= uv * wk;
            }
        }
        for eta in &self.etas {
            let t = slots[eta.slot] / eta.pivot_value;
            if t != 0.0 {
                for &(i, v) in &eta.entries {
                    slots[i] -= v * t;
                }
            }
            slots[eta.slot] = t;
        }
        for v in slots.iter_mut() {
            if v.abs() <= W_EPS {
                *v = 0.0;
            }
        }
    }

    /// y = B^-T c, input in slot coordinates, result in row coordinates
    /// (`work_rows`).
    fn btran(&mut self, c_slots: &mut [f64]) {
        let lu = self.lu.as_ref().expect("factorized");
        let m = self.p.n_rows;
        for eta in self.etas.iter().rev() {
            let mut acc = c_slots[eta.slot];
            for &(i, v) in &eta.entries {
                acc -= v * c_slots[i];
            }
            c_slots[eta.slot] = acc / eta.pivot_value;
        }
        // U^T forward solve in slot coordinates
        for k in 0..m {
            let mut acc = c_slots[k];
            for &(t, uv) in &lu.u_cols[k] {
                acc -= uv * c_slots[t];
            }
            c_slots[k] = acc / lu.u_diag[k];
        }
        // L^T backward solve into original-row coordinates
        let rows = &mut self.work_rows;
        rows.iter_mut().for_each(|v| *v = 0.0);
        for t in (0..m).rev() {
            let mut acc = c_slots[t];
            for &(r, v) in &lu.l_cols[t] {
                acc -= v * rows[r];
            }
            rows[lu.pivot_row[t]] = acc;
        }
    }

    fn infeasibility(&self) -> f64 {
        self.basic
            .iter()
            .map(|&j| {
                let v = self.x[j];
                (self.lower[j] - v).max(0.0) + (v - self.upper[j]).max(0.0)
            })
            .sum()
    }

    /// Phase-aware reduced costs for all nonbasic variables; returns the
    /// entering variable or None at (phase) optimality.
    fn price(&mut self, phase_one: bool) -> Option<(usize, f64)> {
        let m = self.p.n_rows;
        // objective over basic slots
        for k in 0..m {
            let j = self.basic[k];
            self.work_slots[k] = if phase_one {
                let v = self.x[j];
                if v < self.lower[j] - FEAS_TOL {
                    -1.0
                } else if v > self.upper[j] + FEAS_TOL {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.p.obj.get(j).copied().unwrap_or(0.0)
            };
        }
        let mut c_slots = std::mem::take(&mut self.work_slots);
        self.btran(&mut c_slots);
        self.work_slots = c_slots;
        let y = &self.work_rows;

        let mut best: Option<(usize, f64, f64)> = None; // (var, signed d, score)
        for j in 0..self.p.total_vars() {
            let st = self.status[j];
            if st == VarStatus::Basic {
                continue;
            }
            let c_j = if phase_one {
                0.0
            } else {
                self.p.obj.get(j).copied().unwrap_or(0.0)
            };
            let mut d = c_j;
            if j < self.p.n_structural {
                for (i, a) in self.p.csc.col(j) {
                    d -= y[i] * a;
                }
            } else {
                d -= y[j - self.p.n_structural];
            }
            let attractive = match st {
                VarStatus::AtLower => d < -DUAL_TOL,
                VarStatus::AtUpper => d > DUAL_TOL,
                VarStatus::Free => d.abs() > DUAL_TOL,
                VarStatus::Basic => false,
            };
            if !attractive {
                continue;
            }
            if self.bland {
                return Some((j, d));
            }
            let score = d.abs();
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, d, score));
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn iterate(&mut self, phase_one: bool) -> StepOutcome {
        let (entering, d) = match self.price(phase_one) {
            Some(e) => e,
            None => return StepOutcome::NoEntering,
        };
        self.iterations += 1;
        if std::env::var("SIMPLEX_TRACE").is_ok() {
            let maintained: Vec<f64> = self.basic.iter().map(|&j| self.x[j]).collect();
            self.recompute_basics();
            let truth: Vec<f64> = self.basic.iter().map(|&j| self.x[j]).collect();
            let drift = maintained
                .iter()
                .zip(&truth)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            for (k, &j) in self.basic.clone().iter().enumerate() {
                self.x[j] = maintained[k];
            }
            eprintln!(
                "iter {} phase1={} entering {} d={} status {:?} drift={drift:.3e} x={:?}",
                self.iterations, phase_one, entering, d, self.status[entering],
                &self.x
            );
        }

        // direction: increase a variable with negative reduced cost
        let sigma = if d < 0.0 { 1.0 } else { -1.0 };
        self.col_buf.clear();
        let mut col = std::mem::take(&mut self.col_buf);
        self.p.column(entering, &mut col);
        self.ftran(&col);
        self.col_buf = col;

        // ratio test; remembers which bound the blocking basic hits
        let mut t_best = f64::INFINITY;
        let mut leave: Option<(usize, f64, VarStatus)> = None;
        let m = self.p.n_rows;
        for k in 0..m {
            let w = self.work_slots[k];
            if w == 0.0 {
                continue;
            }
            let j = self.basic[k];
            let v = self.x[j];
            let delta = -sigma * w; // movement of basic j per unit step
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let (ratio, hit) = if delta < 0.0 {
                if phase_one && v > hi + FEAS_TOL {
                    ((v - hi) / -delta, VarStatus::AtUpper)
                } else if lo.is_finite() {
                    if phase_one && v < lo - FEAS_TOL {
                        (f64::INFINITY, VarStatus::Free)
                    } else {
                        ((v - lo).max(0.0) / -delta, VarStatus::AtLower)
                    }
                } else {
                    (f64::INFINITY, VarStatus::Free)
                }
            } else {
                if phase_one && v < lo - FEAS_TOL {
                    ((lo - v) / delta, VarStatus::AtLower)
                } else if hi.is_finite() {
                    if phase_one && v > hi + FEAS_TOL {
                        (f64::INFINITY, VarStatus::Free)
                    } else {
                        ((hi - v).max(0.0) / delta, VarStatus::AtUpper)
                    }
                } else {
                    (f64::INFINITY, VarStatus::Free)
                }
            };
            if ratio.is_infinite() {
                continue;
            }
            let better = ratio < t_best - 1e-12
                || (ratio < t_best + 1e-12
                    && leave.map_or(true, |(ls, bw, _)| {
                        w.abs() > bw || (w.abs() == bw && self.basic[k] < self.basic[ls])
                    }));
            if better {
                t_best = ratio.max(0.0);
                leave = Some((k, w.abs(), hit));
            }
        }
        // the entering variable's own range also limits the step
        let range = self.upper[entering] - self.lower[entering];
        let flip_limit = if range.is_finite() { range } else { f64::INFINITY };

        if t_best.is_infinite() && flip_limit.is_infinite() {
            return StepOutcome::Unbounded;
        }

        if flip_limit < t_best {
            // bound flip, basis unchanged
            let t = flip_limit;
            self.apply_step(entering, sigma, t, None);
            self.status[entering] = match self.status[entering] {
                VarStatus::AtLower => VarStatus::AtUpper,
                VarStatus::AtUpper => VarStatus::AtLower,
                other => other,
            };
            self.x[entering] = self.nonbasic_value(entering, self.status[entering]);
            self.after_step(t);
            return StepOutcome::Moved;
        }

        let (slot, _, hit) = leave.expect("bounded step has a blocking slot");
        let w_slot = self.work_slots[slot];
        if w_slot.abs() <= PIVOT_TOL && self.restarts == 0 {
            // shaky pivot; refresh the factors once and retry, accept after
            if self.refactorize().is_err() {
                self.install_basis(None);
                let _ = self.refactorize();
            }
            self.recompute_basics();
            self.restarts += 1;
            return StepOutcome::NumericalRestart;
        }
        self.restarts = 0;

        let leaving = self.basic[slot];
        self.apply_step(entering, sigma, t_best, Some(slot));

        // leaving variable settles on the bound the ratio test hit
        self.status[leaving] = hit;
        self.x[leaving] = self.nonbasic_value(leaving, hit);
        self.status[entering] = VarStatus::Basic;
        self.basic[slot] = entering;

        // record the eta for subsequent solves
        let entries: Vec<(usize, f64)> = self
            .work_slots
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != slot && v.abs() > ZERO_TOL)
            .map(|(i, &v)| (i, v))
            .collect();
        self.etas.push(Eta {
            slot,
            entries,
            pivot_value: w_slot,
        });
        if self.etas.len() >= REFACTOR_EVERY {
            if self.refactorize().is_err() {
                self.install_basis(None);
                let _ = self.refactorize();
            }
            self.recompute_basics();
        }
        self.after_step(t_best);
        StepOutcome::Moved
    }

    /// Moves the entering variable by sigma*t and updates basic values.
    fn apply_step(&mut self, entering: usize, sigma: f64, t: f64, skip_slot: Option<usize>) {
        if t > 0.0 {
            for k in 0..self.p.n_rows {
                if Some(k) == skip_slot {
                    continue;
                }
                let w = self.work_slots[k];
                if w != 0.0 {
                    let j = self.basic[k];
                    self.x[j] -= sigma * t * w;
                }
            }
        }
        if let Some(slot) = skip_slot {
            // entering takes over the slot; its value moves off its bound
            let j = self.basic[slot];
            let _ = j;
        }
        self.x[entering] += sigma * t;
    }

    fn after_step(&mut self, t: f64) {
        if t <= 1e-10 {
            self.stall += 1;
            if self.stall >= STALL_LIMIT {
                self.bland = true;
            }
        } else {
            self.stall = 0;
            self.bland = false;
        }
    }

    /// Recomputes basic values from the factors to remove drift.
    fn recompute_basics(&mut self) {
        let m = self.p.n_rows;
        let mut rhs: Vec<(usize, f64)> = Vec::with_capacity(m);
        let mut dense = self.p.rhs.clone();
        for j in 0..self.p.total_vars() {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            if j < self.p.n_structural {
                for (i, a) in self.p.csc.col(j) {
                    dense[i] -= a * v;
                }
            } else {
                dense[j - self.p.n_structural] -= v;
            }
        }
        for (i, &v) in dense.iter().enumerate() {
            if v != 0.0 {
                rhs.push((i, v));
            }
        }
        self.ftran(&rhs);
        for k in 0..m {
            let j = self.basic[k];
            self.x[j] = self.work_slots[k];
        }
    }

    fn polish_and_finish(&mut self) -> LpResult {
        // Fresh factors and basics for the reported solution.
        if self.refactorize().is_ok() {
            self.recompute_basics();
        }
        self.finish(LpStatus::Optimal)
    }

    fn finish(&mut self, status: LpStatus) -> LpResult {
        let values: Vec<f64> = self.x[..self.p.n_structural].to_vec();
        let objective = values
            .iter()
            .zip(&self.p.obj)
            .map(|(v, c)| v * c)
            .sum();
        LpResult {
            status,
            objective,
            values,
            basis: Basis(self.status.clone()),
            iterations: self.iterations,
        }
    }
}

enum StepOutcome {
    Moved,
    NoEntering,
    Unbounded,
    NumericalRestart,
}
