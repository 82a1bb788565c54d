//! Linear programs in bounded general form and a dense revised simplex solver.
//!
//! A problem is
//!
//! ```text
//! min  c·x
//! s.t. A_eq·x  = b_eq
//!      A_ub·x <= b_ub
//!      lb <= x <= ub        (infinite bounds allowed)
//! ```
//!
//! Constraint rows are stored sparsely; the MPC problems built on top of this are
//! very sparse even though the solver keeps a dense basis inverse.

mod mps;
mod simplex;

pub use mps::write_mps;
pub use simplex::{SimplexOptions, STALL_THRESHOLD};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One sparse constraint row: `(variable index, coefficient)` pairs.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a_eq: Vec<SparseRow>,
    pub b_eq: Vec<f64>,
    pub a_ub: Vec<SparseRow>,
    pub b_ub: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub var_names: Vec<String>,
    pub eq_names: Vec<String>,
    pub ub_names: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal solution; empty unless `status == Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.a_eq.len() + self.a_ub.len()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, cost: f64) -> usize {
        self.c.push(cost);
        self.lb.push(lb);
        self.ub.push(ub);
        self.var_names.push(name.into());
        self.c.len() - 1
    }

    pub fn add_eq(&mut self, name: impl Into<String>, row: SparseRow, rhs: f64) {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self.eq_names.push(name.into());
    }

    /// Adds `row·x <= rhs`.
    pub fn add_le(&mut self, name: impl Into<String>, row: SparseRow, rhs: f64) {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self.ub_names.push(name.into());
    }

    /// Adds `row·x >= rhs` as a negated `<=` row.
    pub fn add_ge(&mut self, name: impl Into<String>, row: SparseRow, rhs: f64) {
        let neg = row.into_iter().map(|(j, a)| (j, -a)).collect();
        self.add_le(name, neg, -rhs);
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|n| n == name)
    }

    /// Builds a problem from dense row-major blocks. Used by the C ABI and tests.
    #[allow(clippy::too_many_arguments)]
    pub fn from_dense(
        c: &[f64],
        a_eq: &[Vec<f64>],
        b_eq: &[f64],
        a_ub: &[Vec<f64>],
        b_ub: &[f64],
        lb: &[f64],
        ub: &[f64],
    ) -> Result<Self> {
        let n = c.len();
        let sparse = |rows: &[Vec<f64>]| -> Result<Vec<SparseRow>> {
            rows.iter()
                .map(|r| {
                    if r.len() != n {
                        return Err(Error::Dimension(format!(
                            "row has {} entries, expected {n}",
                            r.len()
                        )));
                    }
                    Ok(r.iter()
                        .enumerate()
                        .filter(|(_, a)| **a != 0.0)
                        .map(|(j, a)| (j, *a))
                        .collect())
                })
                .collect()
        };
        let p = LpProblem {
            c: c.to_vec(),
            a_eq: sparse(a_eq)?,
            b_eq: b_eq.to_vec(),
            a_ub: sparse(a_ub)?,
            b_ub: b_ub.to_vec(),
            lb: lb.to_vec(),
            ub: ub.to_vec(),
            var_names: (0..n).map(|j| format!("x{j}")).collect(),
            eq_names: (0..a_eq.len()).map(|i| format!("e{i}")).collect(),
            ub_names: (0..a_ub.len()).map(|i| format!("u{i}")).collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        if self.lb.len() != n || self.ub.len() != n {
            return Err(Error::Dimension(format!(
                "{n} costs but {} lower / {} upper bounds",
                self.lb.len(),
                self.ub.len()
            )));
        }
        if self.a_eq.len() != self.b_eq.len() || self.a_ub.len() != self.b_ub.len() {
            return Err(Error::Dimension("row count does not match rhs length".into()));
        }
        if !self.var_names.is_empty() && self.var_names.len() != n {
            return Err(Error::Dimension("variable name count mismatch".into()));
        }
        for (j, (&l, &u)) in self.lb.iter().zip(&self.ub).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::Dimension(format!("variable {j} has bounds [{l}, {u}]")));
            }
        }
        if self.c.iter().any(|v| !v.is_finite())
            || self.b_eq.iter().chain(&self.b_ub).any(|v| !v.is_finite())
        {
            return Err(Error::Dimension("non-finite cost or rhs entry".into()));
        }
        for row in self.a_eq.iter().chain(&self.a_ub) {
            for &(j, a) in row {
                if j >= n {
                    return Err(Error::Dimension(format!("column index {j} >= {n}")));
                }
                if !a.is_finite() {
                    return Err(Error::Dimension(format!("non-finite coefficient on column {j}")));
                }
            }
        }
        Ok(())
    }

    /// Largest row-scaled constraint violation of `x`, including bounds.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &SparseRow| row.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        let scale = |row: &SparseRow| row.iter().fold(1.0f64, |m, &(_, a)| m.max(a.abs()));
        let mut worst = 0.0f64;
        for (row, b) in self.a_eq.iter().zip(&self.b_eq) {
            worst = worst.max((dot(row) - b).abs() / scale(row).max(b.abs()));
        }
        for (row, b) in self.a_ub.iter().zip(&self.b_ub) {
            worst = worst.max((dot(row) - b).max(0.0) / scale(row).max(b.abs()));
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max((self.lb[j] - v).max(0.0)).max((v - self.ub[j]).max(0.0));
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Something that can solve an [`LpProblem`].
///
/// The built-in simplex is the only backend shipped; the trait lets callers
/// plug an external solver behind the same signature.
pub trait LpBackend: Send + Sync {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution>;
}

/// The built-in dense revised simplex.
#[derive(Debug, Clone, Default)]
pub struct BuiltinSimplex {
    pub options: SimplexOptions,
}

impl LpBackend for BuiltinSimplex {
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution> {
        simplex::solve_with(problem, &self.options)
    }
}

/// Solves `problem` with the built-in simplex and default options.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    simplex::solve_with(problem, &SimplexOptions::default())
}
