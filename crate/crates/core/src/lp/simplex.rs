//! Two-phase bounded revised simplex.
//!
//! Nonbasic variables sit at a finite bound (or at zero when free). The basis
//! inverse is kept explicitly as a dense column-major matrix and updated with
//! rank-one eta transformations that only touch the nonzeros of the pivot row
//! and the entering column, which keeps iterations cheap on the very sparse
//! MPC bases. The inverse is rebuilt from scratch whenever the primal residual
//! drifts.

use super::{LpProblem, LpSolution, LpStatus};
use crate::error::{Error, Result};

/// Iterations without objective change before switching to Bland's rule.
pub const STALL_THRESHOLD: usize = 1000;

const PIVOT_TOL: f64 = 1e-9;
const REFRESH_EVERY: usize = 100;
const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Primal feasibility tolerance on the row-scaled problem.
    pub feas_tol: f64,
    /// Reduced-cost tolerance for optimality.
    pub opt_tol: f64,
    /// Iteration cap as a multiple of `n + m`.
    pub iteration_factor: usize,
    pub stall_threshold: usize,
    /// Start from a triangular crash basis instead of the all-artificial one.
    pub crash: bool,
}

impl SimplexOptions {
    pub const DEFAULT: SimplexOptions = SimplexOptions {
        feas_tol: 1e-9,
        opt_tol: 1e-9,
        iteration_factor: 50,
        stall_threshold: STALL_THRESHOLD,
        crash: true,
    };
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NonBasic {
    Lower,
    Upper,
    /// Strictly between its bounds (at zero), free to move either way.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

struct Tableau {
    m: usize,
    n_struct: usize,
    // CSC storage of all columns (structural, slack, artificial).
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<NonBasic>,
    basis: Vec<usize>,
    in_basis: Vec<Option<usize>>,
    binv: Vec<f64>,
    y: Vec<f64>,
    alpha: Vec<f64>,
    alpha_nz: Vec<usize>,
    rho: Vec<f64>,
    rho_nz: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
    bland: bool,
    stall: usize,
    opts: SimplexOptions,
}

pub(crate) fn solve_with(problem: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    problem.validate()?;
    let mut t = Tableau::new(problem, opts.clone());

    match t.run_phase(Phase::One)? {
        Step::Optimal => {}
        _ => return Err(Error::Solver("phase one ended without optimality".into())),
    }
    let infeasibility: f64 = t.artificials().map(|j| t.x[j].abs()).sum();
    let b_scale = t.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if infeasibility > 1e-7 * b_scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NAN,
            iterations: t.iterations,
        });
    }

    t.enter_phase_two(problem);
    let status = match t.run_phase(Phase::Two)? {
        Step::Optimal => LpStatus::Optimal,
        Step::Unbounded => LpStatus::Unbounded,
        Step::Continue => unreachable!(),
    };
    if status == LpStatus::Unbounded {
        return Ok(LpSolution {
            status,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            iterations: t.iterations,
        });
    }

    let x: Vec<f64> = (0..t.n_struct)
        .map(|j| t.x[j].clamp(problem.lb[j], problem.ub[j]))
        .collect();
    let objective = problem.objective_value(&x);
    Ok(LpSolution {
        status,
        x,
        objective,
        iterations: t.iterations,
    })
}

/// A structural column made basic on an equality row by the crash.
struct CrashPivot {
    col: usize,
    row: usize,
    pivot: f64,
}

/// Greedy lower-triangular crash. A column may join only if it has no entry in
/// a row already taken, so the value it gets from its own row is final and can
/// be checked against its bounds right away. Bounded columns go first; free
/// columns, always feasible, soak up what is left. Updates `x` for the chosen
/// columns and `resid` for the remaining rows.
fn crash_basis(
    cols: &[Vec<(usize, f64)>],
    m_eq: usize,
    lo: &[f64],
    hi: &[f64],
    x: &mut [f64],
    resid: &mut [f64],
) -> Vec<CrashPivot> {
    let mut taken = vec![false; resid.len()];
    let mut chosen = Vec::new();
    for free_pass in [false, true] {
        for (j, col) in cols.iter().enumerate() {
            let free = lo[j] == f64::NEG_INFINITY && hi[j] == f64::INFINITY;
            if free != free_pass || lo[j] == hi[j] || col.is_empty() {
                continue;
            }
            if col.iter().any(|&(i, _)| taken[i]) {
                continue;
            }
            let amax = col.iter().fold(0.0f64, |acc, &(_, a)| acc.max(a.abs()));
            // Prefer rows that actually move the column, then larger pivots.
            let mut best: Option<(usize, f64, f64)> = None;
            for &(i, a) in col {
                if i >= m_eq || a.abs() < 0.1 * amax {
                    continue;
                }
                let delta = resid[i] / a;
                let v = x[j] + delta;
                if v < lo[j] || v > hi[j] {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, bd, ba)) => {
                        ((delta != 0.0) as u8, a.abs()) > ((bd != 0.0) as u8, ba.abs())
                    }
                };
                if better {
                    best = Some((i, delta, a));
                }
            }
            let Some((row, delta, pivot)) = best else { continue };
            x[j] += delta;
            for &(i, a) in col {
                resid[i] -= a * delta;
            }
            resid[row] = 0.0;
            taken[row] = true;
            chosen.push(CrashPivot { col: j, row, pivot });
        }
    }
    chosen
}

/// Column-major inverse of a basis made of crash columns (in triangular
/// order) and signed unit columns for every other row.
fn triangular_inverse(
    cols: &[Vec<(usize, f64)>],
    crash: &[CrashPivot],
    unit_sign: &[f64],
    m: usize,
) -> Vec<f64> {
    let mut binv = vec![0.0; m * m];
    let mut res = vec![0.0; m];
    let mut is_crash = vec![false; m];
    for p in crash {
        is_crash[p.row] = true;
    }
    let mut touched = Vec::new();
    for c in 0..m {
        res[c] = 1.0;
        touched.push(c);
        let out = &mut binv[c * m..(c + 1) * m];
        for p in crash {
            let z = res[p.row] / p.pivot;
            if z != 0.0 {
                for &(i, a) in &cols[p.col] {
                    res[i] -= a * z;
                    touched.push(i);
                }
                out[p.row] = z;
            }
            res[p.row] = 0.0;
        }
        for &i in &touched {
            if !is_crash[i] {
                out[i] = res[i] / unit_sign[i];
            }
        }
        for &i in &touched {
            res[i] = 0.0;
        }
        touched.clear();
    }
    binv
}

impl Tableau {
    fn new(p: &LpProblem, opts: SimplexOptions) -> Self {
        let n = p.num_vars();
        let m_eq = p.a_eq.len();
        let m_ub = p.a_ub.len();
        let m = m_eq + m_ub;
        let total = n + m_ub + m;

        // Row equilibration: each row divided by its largest coefficient.
        let rows: Vec<(&Vec<(usize, f64)>, f64)> = p
            .a_eq
            .iter()
            .zip(&p.b_eq)
            .chain(p.a_ub.iter().zip(&p.b_ub))
            .map(|(r, &b)| (r, b))
            .collect();
        let mut row_scale = vec![1.0; m];
        let mut b = vec![0.0; m];
        for (i, (row, rhs)) in rows.iter().enumerate() {
            let big = row.iter().fold(0.0f64, |acc, &(_, a)| acc.max(a.abs()));
            if big > 0.0 {
                row_scale[i] = 1.0 / big;
            }
            b[i] = rhs * row_scale[i];
        }

        // Transpose the structural rows into columns, merging duplicate entries.
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, (row, _)) in rows.iter().enumerate() {
            for &(j, a) in row.iter() {
                if a != 0.0 {
                    cols[j].push((i, a * row_scale[i]));
                }
            }
        }
        for col in cols.iter_mut() {
            col.sort_by_key(|e| e.0);
            col.dedup_by(|later, earlier| {
                if later.0 == earlier.0 {
                    earlier.1 += later.1;
                    true
                } else {
                    false
                }
            });
            col.retain(|e| e.1 != 0.0);
        }

        let mut lo = Vec::with_capacity(total);
        let mut hi = Vec::with_capacity(total);
        lo.extend_from_slice(&p.lb);
        hi.extend_from_slice(&p.ub);
        lo.extend(std::iter::repeat_n(0.0, m_ub + m));
        hi.extend(std::iter::repeat_n(f64::INFINITY, m_ub + m));

        let mut x = vec![0.0; total];
        let mut state = vec![NonBasic::Lower; total];
        for j in 0..n {
            let (l, u) = (lo[j], hi[j]);
            if l == 0.0 || (l > 0.0 && l.is_finite()) {
                x[j] = l;
                state[j] = NonBasic::Lower;
            } else if u == 0.0 || (u < 0.0 && u.is_finite()) {
                x[j] = u;
                state[j] = NonBasic::Upper;
            } else if l < 0.0 && u > 0.0 {
                // Zero is inside the box: start there rather than at an extreme.
                x[j] = 0.0;
                state[j] = NonBasic::Free;
            } else if l.is_finite() {
                x[j] = l;
                state[j] = NonBasic::Lower;
            } else if u.is_finite() {
                x[j] = u;
                state[j] = NonBasic::Upper;
            } else {
                x[j] = 0.0;
                state[j] = NonBasic::Free;
            }
        }

        // Residual of each row with every structural variable at its start value.
        let mut resid = b.clone();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(i, a) in col {
                    resid[i] -= a * x[j];
                }
            }
        }

        let crash = if opts.crash {
            crash_basis(&cols, m_eq, &lo, &hi, &mut x, &mut resid)
        } else {
            Vec::new()
        };

        let mut basis = vec![0usize; m];
        let mut in_basis = vec![None; total];
        let mut art_sign = vec![1.0; m];
        let mut unit_sign = vec![1.0; m];
        let mut crashed = vec![false; m];
        for c in &crash {
            basis[c.row] = c.col;
            crashed[c.row] = true;
        }
        for i in 0..m {
            let art = n + m_ub + i;
            if crashed[i] {
                hi[art] = 0.0;
            } else if i >= m_eq && resid[i] >= 0.0 {
                let slack = n + (i - m_eq);
                basis[i] = slack;
                x[slack] = resid[i];
                hi[art] = 0.0;
            } else {
                art_sign[i] = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
                unit_sign[i] = art_sign[i];
                basis[i] = art;
                x[art] = resid[i].abs();
            }
            in_basis[basis[i]] = Some(i);
        }
        let binv = triangular_inverse(&cols, &crash, &unit_sign, m);

        let mut col_start = Vec::with_capacity(total + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_start.push(0);
        for col in &cols {
            for &(i, a) in col {
                row_idx.push(i);
                vals.push(a);
            }
            col_start.push(row_idx.len());
        }
        for k in 0..m_ub {
            row_idx.push(m_eq + k);
            vals.push(1.0);
            col_start.push(row_idx.len());
        }
        for (i, &s) in art_sign.iter().enumerate() {
            row_idx.push(i);
            vals.push(s);
            col_start.push(row_idx.len());
        }

        let mut cost = vec![0.0; total];
        for c in cost.iter_mut().skip(n + m_ub) {
            *c = 1.0;
        }

        let max_iterations = opts.iteration_factor * (n + m).max(1);
        let mut t = Tableau {
            m,
            n_struct: n,
            col_start,
            row_idx,
            vals,
            b,
            lo,
            hi,
            cost,
            x,
            state,
            basis,
            in_basis,
            binv,
            y: vec![0.0; m],
            alpha: vec![0.0; m],
            alpha_nz: Vec::with_capacity(m),
            rho: vec![0.0; m],
            rho_nz: Vec::with_capacity(m),
            iterations: 0,
            max_iterations,
            bland: false,
            stall: 0,
            opts,
        };
        if !crash.is_empty() {
            t.recompute_basics();
            debug_assert!(t.primal_residual() < 1e-8, "crash basis inverse is off");
        }
        t.recompute_duals();
        t
    }

    fn artificials(&self) -> std::ops::Range<usize> {
        let start = self.cost.len() - self.m;
        start..self.cost.len()
    }

    fn enter_phase_two(&mut self, p: &LpProblem) {
        let total = self.cost.len();
        for j in self.artificials() {
            self.hi[j] = 0.0;
            if self.in_basis[j].is_none() {
                self.x[j] = 0.0;
                self.state[j] = NonBasic::Lower;
            }
        }
        self.cost = vec![0.0; total];
        self.cost[..self.n_struct].copy_from_slice(&p.c);
        self.bland = false;
        self.stall = 0;
        self.recompute_duals();
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.col_start[j], self.col_start[j + 1]);
        self.row_idx[s..e].iter().copied().zip(self.vals[s..e].iter().copied())
    }

    fn recompute_duals(&mut self) {
        let m = self.m;
        let costed: Vec<(usize, f64)> = self
            .basis
            .iter()
            .enumerate()
            .filter_map(|(i, &bj)| (self.cost[bj] != 0.0).then_some((i, self.cost[bj])))
            .collect();
        for c in 0..m {
            let col = &self.binv[c * m..(c + 1) * m];
            self.y[c] = costed.iter().map(|&(i, cb)| cb * col[i]).sum();
        }
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, v)| c * v).sum()
    }

    fn run_phase(&mut self, phase: Phase) -> Result<Step> {
        let mut since_refresh = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::Solver(format!(
                    "iteration cap {} reached in phase {:?}",
                    self.max_iterations, phase
                )));
            }
            if since_refresh >= REFRESH_EVERY {
                self.refresh()?;
                since_refresh = 0;
            }
            match self.iterate(phase)? {
                Step::Continue => since_refresh += 1,
                Step::Optimal => {
                    // Confirm optimality against a freshly computed primal/dual pair.
                    if since_refresh == 0 {
                        return Ok(Step::Optimal);
                    }
                    self.refresh()?;
                    since_refresh = 0;
                }
                Step::Unbounded => return Ok(Step::Unbounded),
            }
        }
    }

    /// Recomputes basic values and duals, reinverting the basis first if the
    /// primal residual drifted.
    fn refresh(&mut self) -> Result<()> {
        self.recompute_basics();
        if self.primal_residual() > RESIDUAL_TOL {
            self.reinvert()?;
            self.recompute_basics();
        }
        self.recompute_duals();
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut rhs = self.b.clone();
        for j in 0..self.cost.len() {
            if self.in_basis[j].is_none() && self.x[j] != 0.0 {
                let v = self.x[j];
                for (i, a) in self.column(j) {
                    rhs[i] -= a * v;
                }
            }
        }
        let mut xb = vec![0.0; m];
        for (c, &r) in rhs.iter().enumerate() {
            if r != 0.0 {
                let col = &self.binv[c * m..(c + 1) * m];
                for (acc, v) in xb.iter_mut().zip(col) {
                    *acc += v * r;
                }
            }
        }
        for (i, &bj) in self.basis.iter().enumerate() {
            self.x[bj] = xb[i];
        }
    }

    fn primal_residual(&self) -> f64 {
        let mut r = self.b.clone();
        for j in 0..self.cost.len() {
            let v = self.x[j];
            if v != 0.0 {
                for (i, a) in self.column(j) {
                    r[i] -= a * v;
                }
            }
        }
        r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Gauss-Jordan inversion of the current basis matrix.
    fn reinvert(&mut self) -> Result<()> {
        let m = self.m;
        let w = 2 * m;
        let mut a = vec![0.0; m * w];
        for (c, &bj) in self.basis.iter().enumerate() {
            for (i, v) in self.column(bj) {
                a[i * w + c] = v;
            }
        }
        for i in 0..m {
            a[i * w + m + i] = 1.0;
        }
        let mut nz = Vec::with_capacity(w);
        for k in 0..m {
            let (mut p, mut best) = (k, 0.0f64);
            for i in k..m {
                let v = a[i * w + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-13 {
                return Err(Error::Numerical(format!("singular basis at column {k}")));
            }
            if p != k {
                for c in 0..w {
                    a.swap(k * w + c, p * w + c);
                }
            }
            let piv = a[k * w + k];
            nz.clear();
            for c in 0..w {
                if a[k * w + c] != 0.0 {
                    a[k * w + c] /= piv;
                    nz.push(c);
                }
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = a[i * w + k];
                if f != 0.0 {
                    for &c in &nz {
                        a[i * w + c] -= f * a[k * w + c];
                    }
                }
            }
        }
        for i in 0..m {
            for c in 0..m {
                self.binv[c * m + i] = a[i * w + m + c];
            }
        }
        Ok(())
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        let mut d = self.cost[j];
        for (i, a) in self.column(j) {
            d -= self.y[i] * a;
        }
        d
    }

    /// Returns the entering column and its direction (+1 increase, -1 decrease).
    fn select_entering(&self) -> Option<(usize, f64, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cost.len() {
            if self.in_basis[j].is_some() || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.reduced_cost(j);
            let dir = match self.state[j] {
                NonBasic::Lower if d < -tol => 1.0,
                NonBasic::Upper if d > tol => -1.0,
                NonBasic::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir, d));
            }
            match best {
                Some((_, _, bd)) if d.abs() <= bd.abs() => {}
                _ => best = Some((j, dir, d)),
            }
        }
        best
    }

    fn ftran(&mut self, q: usize) {
        let m = self.m;
        self.alpha.iter_mut().for_each(|v| *v = 0.0);
        let (s, e) = (self.col_start[q], self.col_start[q + 1]);
        for k in s..e {
            let (r, a) = (self.row_idx[k], self.vals[k]);
            let col = &self.binv[r * m..(r + 1) * m];
            for (acc, v) in self.alpha.iter_mut().zip(col) {
                *acc += a * v;
            }
        }
        self.alpha_nz.clear();
        for (i, &v) in self.alpha.iter().enumerate() {
            if v != 0.0 {
                self.alpha_nz.push(i);
            }
        }
    }

    /// Bounded ratio test. Returns `(step, leaving row)`; `None` row means the
    /// entering variable hits its own opposite bound first.
    fn ratio_test(&self, q: usize, dir: f64) -> Option<(f64, Option<usize>)> {
        let flip = if dir > 0.0 { self.hi[q] - self.x[q] } else { self.x[q] - self.lo[q] };
        let tol = self.opts.feas_tol;
        let ratio = |i: usize, slack: f64| -> Option<f64> {
            let a = self.alpha[i];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let bj = self.basis[i];
            let delta = -dir * a;
            if delta < 0.0 && self.lo[bj].is_finite() {
                Some(((self.x[bj] - self.lo[bj] + slack) / -delta).max(0.0))
            } else if delta > 0.0 && self.hi[bj].is_finite() {
                Some(((self.hi[bj] - self.x[bj] + slack) / delta).max(0.0))
            } else {
                None
            }
        };

        let mut leave: Option<(f64, usize)> = None;
        if self.bland {
            for &i in &self.alpha_nz {
                if let Some(t) = ratio(i, 0.0) {
                    let better = match leave {
                        None => true,
                        Some((bt, bi)) => {
                            t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        leave = Some((t, i));
                    }
                }
            }
        } else {
            // Harris: bound the step with relaxed bounds, then take the largest pivot.
            let mut theta_max = f64::INFINITY;
            for &i in &self.alpha_nz {
                if let Some(t) = ratio(i, tol) {
                    theta_max = theta_max.min(t);
                }
            }
            if theta_max.is_finite() {
                let mut best_piv = 0.0;
                for &i in &self.alpha_nz {
                    if let Some(t) = ratio(i, 0.0) {
                        if t <= theta_max {
                            let piv = self.alpha[i].abs();
                            if piv > best_piv {
                                best_piv = piv;
                                leave = Some((t, i));
                            }
                        }
                    }
                }
            }
        }

        match leave {
            Some((t, _)) if flip <= t => Some((flip, None)),
            Some((t, i)) => Some((t, Some(i))),
            None if flip.is_finite() => Some((flip, None)),
            None => None,
        }
    }

    fn iterate(&mut self, phase: Phase) -> Result<Step> {
        let Some((q, dir, d)) = self.select_entering() else {
            return Ok(Step::Optimal);
        };
        self.ftran(q);
        let Some((theta, leaving)) = self.ratio_test(q, dir) else {
            if phase == Phase::One {
                return Err(Error::Solver("unbounded ray in phase one".into()));
            }
            return Ok(Step::Unbounded);
        };
        self.iterations += 1;
        let before = self.objective();

        self.x[q] += dir * theta;
        for &i in &self.alpha_nz {
            let bj = self.basis[i];
            self.x[bj] -= dir * theta * self.alpha[i];
        }

        match leaving {
            None => {
                self.state[q] = if dir > 0.0 { NonBasic::Upper } else { NonBasic::Lower };
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
            }
            Some(r) => self.pivot(q, r, dir, d),
        }

        let after = self.objective();
        if (before - after).abs() <= 1e-12 * (1.0 + before.abs()) {
            self.stall += 1;
            if self.stall >= self.opts.stall_threshold {
                self.bland = true;
            }
        } else {
            self.stall = 0;
        }
        Ok(Step::Continue)
    }

    fn pivot(&mut self, q: usize, r: usize, dir: f64, d: f64) {
        let m = self.m;
        let leaving = self.basis[r];
        let delta = -dir * self.alpha[r];
        if delta < 0.0 {
            self.x[leaving] = self.lo[leaving];
            self.state[leaving] = NonBasic::Lower;
        } else {
            self.x[leaving] = self.hi[leaving];
            self.state[leaving] = NonBasic::Upper;
        }
        if self.lo[leaving] == f64::NEG_INFINITY && self.hi[leaving] == f64::INFINITY {
            self.x[leaving] = 0.0;
            self.state[leaving] = NonBasic::Free;
        }
        self.in_basis[leaving] = None;
        self.basis[r] = q;
        self.in_basis[q] = Some(r);

        // Pivot row of the old inverse.
        self.rho_nz.clear();
        for c in 0..m {
            let v = self.binv[c * m + r];
            self.rho[c] = v;
            if v != 0.0 {
                self.rho_nz.push(c);
            }
        }
        let piv = self.alpha[r];
        for &c in &self.rho_nz {
            let val = self.rho[c] / piv;
            let col = &mut self.binv[c * m..(c + 1) * m];
            for &i in &self.alpha_nz {
                col[i] -= self.alpha[i] * val;
            }
            col[r] = val;
        }
        let step = d / piv;
        for &c in &self.rho_nz {
            self.y[c] += step * self.rho[c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn maximize_single_variable() {
        let p = LpProblem::from_dense(&[-1.0], &[], &[], &[vec![1.0]], &[1.0], &[0.0], &[f64::INFINITY])
            .unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_rows_are_infeasible() {
        // x >= 2 and x <= 1
        let p = LpProblem::from_dense(
            &[1.0],
            &[],
            &[],
            &[vec![-1.0], vec![1.0]],
            &[-2.0, 1.0],
            &[f64::NEG_INFINITY],
            &[f64::INFINITY],
        )
        .unwrap();
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn free_variable_unbounded() {
        let p = LpProblem::from_dense(
            &[1.0, 0.0],
            &[vec![1.0, -1.0]],
            &[0.0],
            &[],
            &[],
            &[f64::NEG_INFINITY, f64::NEG_INFINITY],
            &[f64::INFINITY, f64::INFINITY],
        )
        .unwrap();
        assert_eq!(solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn no_rows_picks_cheapest_bounds() {
        let p = LpProblem::from_dense(&[1.0, -2.0], &[], &[], &[], &[], &[-1.0, 0.0], &[3.0, 4.0])
            .unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.x, vec![-1.0, 4.0]);
        assert_eq!(s.objective, -9.0);
    }

    #[test]
    fn equality_with_free_variables() {
        // min x + 2y s.t. x + y = 3, x - y = 1, both free -> x=2, y=1
        let inf = f64::INFINITY;
        let p = LpProblem::from_dense(
            &[1.0, 2.0],
            &[vec![1.0, 1.0], vec![1.0, -1.0]],
            &[3.0, 1.0],
            &[],
            &[],
            &[-inf, -inf],
            &[inf, inf],
        )
        .unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_dimensions_rejected() {
        let mut p = LpProblem::default();
        p.add_var("x", 0.0, 1.0, 1.0);
        p.add_le("r", vec![(3, 1.0)], 1.0);
        assert!(matches!(solve(&p), Err(crate::Error::Dimension(_))));
        let p = LpProblem::from_dense(&[1.0], &[], &[], &[], &[], &[2.0], &[1.0]);
        assert!(p.is_err());
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance under textbook Dantzig pivoting.
        let p = LpProblem::from_dense(
            &[-0.75, 150.0, -0.02, 6.0],
            &[],
            &[],
            &[
                vec![0.25, -60.0, -0.04, 9.0],
                vec![0.5, -90.0, -0.02, 3.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            &[0.0, 0.0, 1.0],
            &[0.0; 4],
            &[f64::INFINITY; 4],
        )
        .unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn bland_mode_from_the_start_agrees() {
        let p = LpProblem::from_dense(
            &[-3.0, -5.0],
            &[],
            &[],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
            &[0.0; 2],
            &[f64::INFINITY; 2],
        )
        .unwrap();
        let opts = SimplexOptions {
            stall_threshold: 0,
            ..Default::default()
        };
        let a = BuiltinSimplex { options: opts }.solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert!((a.objective + 36.0).abs() < 1e-9);
        assert!((b.objective + 36.0).abs() < 1e-9);
    }
}
