//! Dense bounded-variable primal simplex.
//!
//! Pricing is Dantzig's largest reduced cost; after a long run of degenerate
//! pivots it switches to Bland's lowest-index rule until the objective moves
//! again, which rules out cycling. Ties in the ratio test always go to the
//! lowest index. Bounded columns start at the bound their cost prefers, and
//! `B⁻¹` is rebuilt from the original columns every few dozen pivots and
//! before optimality or unboundedness is reported.
//!
//! Every column is rewritten as a nonnegative variable `y ∈ [0, u]` (shifted,
//! mirrored or split into two when free). Rows get an artificial column each;
//! rows that contain a usable singleton column start with that column basic
//! instead. The artificial columns stay in the tableau so `B⁻¹` (and with it
//! the row duals) can be read off at the end.

use crate::error::{Error, Result};

use super::{LinearProgram, LpSolution, LpStatus, Sense};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;
const PHASE1_TOL: f64 = 1e-7;
/// Consecutive degenerate pivots before pricing falls back to Bland's rule.
const DEGENERATE_RUN: usize = 500;
/// Pivots between rebuilds of `B⁻¹` from the original columns.
const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverOptions {
    /// `None` picks a limit proportional to the tableau size.
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
enum ColumnMap {
    /// `x = lo + y`
    Shifted { var: usize, lo: f64 },
    /// `x = hi − y`
    Mirrored { var: usize, hi: f64 },
    /// positive or negative half of a free variable
    FreePart { var: usize, sign: f64 },
}

struct Tableau {
    rows: usize,
    width: usize,
    /// row-major `B⁻¹ [A | I]`
    cells: Vec<f64>,
    /// reduced costs, one per column
    reduced: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    blocked: Vec<bool>,
    is_basic: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
    /// `[A | I]` and `b` after the column rewrite and row signs.
    original: Vec<f64>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    since_refactor: usize,
    degenerate: usize,
}

enum Step {
    Optimal,
    Continue,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    fn value_of_nonbasic(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    fn reset_costs(&mut self, cost: &[f64]) {
        self.cost.copy_from_slice(cost);
        self.reduced.copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.cells[i * self.width..(i + 1) * self.width];
            for (d, a) in self.reduced.iter_mut().zip(row) {
                *d -= cb * a;
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let p = self.at(r, j);
        let mut pivot_row: Vec<f64> = self.cells[r * w..(r + 1) * w].to_vec();
        for v in pivot_row.iter_mut() {
            *v /= p;
        }
        pivot_row[j] = 1.0;
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let factor = self.cells[i * w + j];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.cells[i * w..(i + 1) * w];
            for (a, b) in row.iter_mut().zip(&pivot_row) {
                *a -= factor * b;
            }
            row[j] = 0.0;
        }
        let factor = self.reduced[j];
        if factor != 0.0 {
            for (d, b) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= factor * b;
            }
            self.reduced[j] = 0.0;
        }
        self.cells[r * w..(r + 1) * w].copy_from_slice(&pivot_row);
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    /// Recomputes `B⁻¹`, the tableau, `β` and the reduced costs from the
    /// original data. Leaves the tableau untouched if the basis is singular.
    fn refactor(&mut self) {
        let (m, w) = (self.rows, self.width);
        self.since_refactor = 0;
        if m == 0 {
            return;
        }
        // Gauss-Jordan on [B | I] with partial pivoting.
        let mut aug = vec![0.0; m * 2 * m];
        for i in 0..m {
            for (k, &col) in self.basis.iter().enumerate() {
                aug[i * 2 * m + k] = self.original[i * w + col];
            }
            aug[i * 2 * m + m + i] = 1.0;
        }
        for c in 0..m {
            let r = (c..m).max_by(|&a, &b| aug[a * 2 * m + c].abs().total_cmp(&aug[b * 2 * m + c].abs())).unwrap();
            let p = aug[r * 2 * m + c];
            if p.abs() <= PIVOT_TOL {
                return;
            }
            if r != c {
                for k in 0..2 * m {
                    aug.swap(r * 2 * m + k, c * 2 * m + k);
                }
            }
            for k in 0..2 * m {
                aug[c * 2 * m + k] /= p;
            }
            for i in 0..m {
                let f = aug[i * 2 * m + c];
                if i == c || f == 0.0 {
                    continue;
                }
                for k in 0..2 * m {
                    aug[i * 2 * m + k] -= f * aug[c * 2 * m + k];
                }
            }
        }
        // Row i of B⁻¹ belongs to basis position i.
        let mut rhs = self.rhs.clone();
        for j in 0..w {
            if !self.is_basic[j] && self.at_upper[j] {
                for (i, v) in rhs.iter_mut().enumerate() {
                    *v -= self.original[i * w + j] * self.upper[j];
                }
            }
        }
        for i in 0..m {
            let inv = &aug[i * 2 * m + m..(i + 1) * 2 * m];
            let row = &mut self.cells[i * w..(i + 1) * w];
            row.iter_mut().for_each(|v| *v = 0.0);
            let mut beta = 0.0;
            for (k, &b) in inv.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                beta += b * rhs[k];
                for (v, &a) in row.iter_mut().zip(&self.original[k * w..(k + 1) * w]) {
                    *v += b * a;
                }
            }
            for &col in &self.basis {
                row[col] = 0.0;
            }
            row[self.basis[i]] = 1.0;
            self.beta[i] = beta;
        }
        let cost = self.cost.clone();
        self.reset_costs(&cost);
    }

    fn step(&mut self) -> Result<Step> {
        if self.since_refactor >= REFACTOR_EVERY.max(self.rows) {
            self.refactor();
        }
        let improving = |j: usize| {
            if self.is_basic[j] || self.blocked[j] {
                return false;
            }
            let d = self.reduced[j];
            if self.at_upper[j] {
                d > COST_TOL
            } else {
                d < -COST_TOL && self.upper[j] > 0.0
            }
        };
        // Dantzig pricing, or Bland's lowest index while pivots stay degenerate.
        let entering = if self.degenerate >= DEGENERATE_RUN {
            (0..self.width).find(|&j| improving(j))
        } else {
            (0..self.width).filter(|&j| improving(j)).fold(None, |best: Option<usize>, j| match best {
                Some(b) if self.reduced[b].abs() >= self.reduced[j].abs() => Some(b),
                _ => Some(j),
            })
        };
        let Some(j) = entering else {
            if self.since_refactor == 0 {
                return Ok(Step::Optimal);
            }
            // Confirm optimality on fresh numbers.
            self.refactor();
            return Ok(Step::Continue);
        };
        if self.iterations >= self.max_iterations {
            return Err(Error::IterationLimit(self.max_iterations));
        }

        let dir = if self.at_upper[j] { -1.0 } else { 1.0 };
        // (limit, variable index, row or None for a bound flip, leaves at upper)
        let mut best: (f64, usize, Option<usize>, bool) = (self.upper[j], j, None, false);
        for i in 0..self.rows {
            let alpha = self.at(i, j);
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * alpha;
            let var = self.basis[i];
            let (limit, to_upper) = if rate < 0.0 {
                ((self.beta[i] / -rate).max(0.0), false)
            } else if self.upper[var].is_finite() {
                (((self.upper[var] - self.beta[i]) / rate).max(0.0), true)
            } else {
                continue;
            };
            let better = limit < best.0 - TIE_TOL || ((limit - best.0).abs() <= TIE_TOL && var < best.1);
            if better {
                best = (limit, var, Some(i), to_upper);
            }
        }
        let (t, _, row, to_upper) = best;
        if !t.is_finite() {
            if self.since_refactor == 0 {
                return Err(Error::Unbounded);
            }
            self.refactor();
            return Ok(Step::Continue);
        }
        self.iterations += 1;
        self.since_refactor += 1;
        if t > TIE_TOL {
            self.degenerate = 0;
        } else {
            self.degenerate += 1;
        }
        for i in 0..self.rows {
            let alpha = self.at(i, j);
            if alpha != 0.0 {
                self.beta[i] -= dir * t * alpha;
            }
        }
        match row {
            None => self.at_upper[j] = !self.at_upper[j],
            Some(r) => {
                let leaving = self.basis[r];
                self.at_upper[leaving] = to_upper;
                let entering_value = if dir > 0.0 { t } else { self.upper[j] - t };
                self.pivot(r, j);
                self.beta[r] = entering_value;
                self.at_upper[j] = false;
            }
        }
        Ok(Step::Continue)
    }

    fn run(&mut self) -> Result<()> {
        while let Step::Continue = self.step()? {}
        Ok(())
    }
}

/// Solves `lp` to optimality.
pub fn solve(lp: &LinearProgram, options: SolverOptions) -> Result<LpSolution> {
    lp.validate()?;
    let m = lp.rows.len();
    let n = lp.objective.len();

    // Column rewrite.
    let mut maps = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo.is_finite() {
            maps.push(ColumnMap::Shifted { var: j, lo });
            upper.push(hi - lo);
        } else if hi.is_finite() {
            maps.push(ColumnMap::Mirrored { var: j, hi });
            upper.push(f64::INFINITY);
        } else {
            maps.push(ColumnMap::FreePart { var: j, sign: 1.0 });
            maps.push(ColumnMap::FreePart { var: j, sign: -1.0 });
            upper.push(f64::INFINITY);
            upper.push(f64::INFINITY);
        }
    }
    let structural = maps.len();
    let width = structural + m;
    let internal_sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let mut cost = vec![0.0; width];
    let mut cells = vec![0.0; m * width];
    let mut rhs = lp.rhs.clone();
    for (k, map) in maps.iter().enumerate() {
        let (var, scale, offset) = match *map {
            ColumnMap::Shifted { var, lo } => (var, 1.0, lo),
            ColumnMap::Mirrored { var, hi } => (var, -1.0, hi),
            ColumnMap::FreePart { var, sign } => (var, sign, 0.0),
        };
        cost[k] = internal_sign * scale * lp.objective[var];
        for i in 0..m {
            let a = lp.rows[i][var];
            if a == 0.0 {
                continue;
            }
            cells[i * width + k] = scale * a;
            rhs[i] -= a * offset;
        }
    }

    // Bounded columns start at the bound their cost prefers.
    let mut at_upper = vec![false; width];
    for k in 0..structural {
        if cost[k] < 0.0 && upper[k].is_finite() {
            at_upper[k] = true;
            for i in 0..m {
                rhs[i] -= cells[i * width + k] * upper[k];
            }
        }
    }

    // Row signs make the right-hand side nonnegative.
    let mut row_sign = vec![1.0; m];
    for i in 0..m {
        if rhs[i] < 0.0 {
            row_sign[i] = -1.0;
            rhs[i] = -rhs[i];
            for v in &mut cells[i * width..i * width + structural] {
                *v = -*v;
            }
        }
        cells[i * width + structural + i] = 1.0;
    }
    upper.extend(std::iter::repeat(f64::INFINITY).take(m));

    let mut column_nonzeros = vec![0usize; structural];
    for i in 0..m {
        for k in 0..structural {
            if cells[i * width + k] != 0.0 {
                column_nonzeros[k] += 1;
            }
        }
    }

    let max_iterations = options.max_iterations.unwrap_or(200_000 + 200 * (m + width));
    let mut tab = Tableau {
        rows: m,
        width,
        cells,
        reduced: vec![0.0; width],
        beta: rhs,
        basis: (structural..width).collect(),
        upper,
        at_upper,
        blocked: vec![false; width],
        is_basic: (0..width).map(|k| k >= structural).collect(),
        iterations: 0,
        max_iterations,
        original: Vec::new(),
        rhs: Vec::new(),
        cost: vec![0.0; width],
        since_refactor: 0,
        degenerate: 0,
    };
    tab.original = tab.cells.clone();
    tab.rhs = (0..m)
        .map(|i| {
            let shift: f64 = (0..structural).filter(|&k| tab.at_upper[k]).map(|k| tab.at(i, k) * tab.upper[k]).sum();
            tab.beta[i] + shift
        })
        .collect();

    // Crash: a singleton column whose implied value is within its bounds.
    for i in 0..m {
        let chosen = (0..structural).find(|&k| {
            let a = tab.at(i, k);
            if column_nonzeros[k] != 1 || a == 0.0 || tab.is_basic[k] || tab.at_upper[k] {
                return false;
            }
            let v = tab.beta[i] / a;
            v >= 0.0 && v <= tab.upper[k]
        });
        if let Some(k) = chosen {
            let v = tab.beta[i] / tab.at(i, k);
            tab.pivot(i, k);
            tab.beta[i] = v;
        }
    }

    // Phase 1 over the artificials that are still basic.
    let mut phase1_cost = vec![0.0; width];
    let mut needs_phase1 = false;
    for k in structural..width {
        if tab.is_basic[k] {
            phase1_cost[k] = 1.0;
            needs_phase1 = true;
        } else {
            tab.blocked[k] = true;
        }
    }
    if needs_phase1 {
        tab.reset_costs(&phase1_cost);
        tab.run()?;
        let infeasibility: f64 = (0..m).filter(|&i| tab.basis[i] >= structural).map(|i| tab.beta[i]).sum();
        let scale = 1.0 + lp.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > PHASE1_TOL * scale {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] < structural {
                continue;
            }
            let candidate = (0..structural).find(|&k| !tab.is_basic[k] && tab.at(r, k).abs() > PIVOT_TOL);
            if let Some(k) = candidate {
                let v = tab.value_of_nonbasic(k);
                tab.pivot(r, k);
                tab.beta[r] = v;
                tab.at_upper[k] = false;
            }
        }
        for k in structural..width {
            tab.upper[k] = 0.0;
            if !tab.is_basic[k] {
                tab.blocked[k] = true;
            }
        }
        for i in 0..m {
            if tab.basis[i] >= structural {
                tab.beta[i] = 0.0;
            }
        }
    }

    tab.reset_costs(&cost);
    tab.run()?;

    // Internal values.
    let mut internal = vec![0.0; width];
    for k in 0..width {
        if !tab.is_basic[k] {
            internal[k] = tab.value_of_nonbasic(k);
        }
    }
    for i in 0..m {
        internal[tab.basis[i]] = tab.beta[i];
    }

    let mut point = vec![0.0; n];
    for (k, map) in maps.iter().enumerate() {
        match *map {
            ColumnMap::Shifted { var, lo } => point[var] = lo + internal[k],
            ColumnMap::Mirrored { var, hi } => point[var] = hi - internal[k],
            ColumnMap::FreePart { var, sign } => point[var] += sign * internal[k],
        }
    }
    for j in 0..n {
        point[j] = point[j].clamp(lp.lower[j], lp.upper[j]);
    }

    // The artificial column i has zero phase-2 cost, so its reduced cost is
    // −(c_B B⁻¹)_i in the sign-adjusted, internally minimized system.
    let duals = (0..m).map(|i| internal_sign * row_sign[i] * -tab.reduced[structural + i]).collect();

    let value = lp.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    let max_residual = lp.residual(&point);
    Ok(LpSolution { status: LpStatus::Optimal, value, point, duals, iterations: tab.iterations, max_residual })
}
