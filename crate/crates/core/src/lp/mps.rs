//! Fixed-format MPS export for cross-checking problems in external solvers.
//!
//! Fixed MPS limits names to eight characters, so rows and columns are renamed
//! `R0000001`/`C0000001`; the original names are listed in `*` comment lines.

use super::LpProblem;
use std::fmt::Write as _;
use std::io::{self, Write};

fn num(v: f64) -> String {
    // Field width in fixed MPS is 12 characters.
    let s = format!("{v}");
    if s.len() <= 12 {
        s
    } else {
        format!("{v:.6e}")
    }
}

pub fn write_mps<W: Write>(p: &LpProblem, name: &str, mut out: W) -> io::Result<()> {
    let n = p.num_vars();
    let m_eq = p.a_eq.len();
    let row_name = |i: usize| format!("R{:07}", i + 1);
    let col_name = |j: usize| format!("C{:07}", j + 1);

    let mut s = String::new();
    let label = |names: &[String], i: usize| names.get(i).cloned().unwrap_or_default();
    for j in 0..n {
        let _ = writeln!(s, "* {} {}", col_name(j), label(&p.var_names, j));
    }
    for i in 0..p.num_rows() {
        let orig = if i < m_eq {
            label(&p.eq_names, i)
        } else {
            label(&p.ub_names, i - m_eq)
        };
        let _ = writeln!(s, "* {} {}", row_name(i), orig);
    }
    let _ = writeln!(s, "NAME          {}", &name[..name.len().min(8)]);
    s.push_str("ROWS\n N  COST\n");
    for i in 0..p.num_rows() {
        let kind = if i < m_eq { 'E' } else { 'L' };
        let _ = writeln!(s, " {kind}  {}", row_name(i));
    }

    // Column-wise coefficients.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in p.a_eq.iter().chain(&p.a_ub).enumerate() {
        for &(j, a) in row {
            cols[j].push((i, a));
        }
    }
    s.push_str("COLUMNS\n");
    for (j, col) in cols.iter().enumerate() {
        if p.c[j] != 0.0 {
            let _ = writeln!(s, "    {:<8}  {:<8}  {:>12}", col_name(j), "COST", num(p.c[j]));
        }
        for &(i, a) in col {
            let _ = writeln!(s, "    {:<8}  {:<8}  {:>12}", col_name(j), row_name(i), num(a));
        }
    }
    s.push_str("RHS\n");
    for (i, b) in p.b_eq.iter().chain(&p.b_ub).enumerate() {
        if *b != 0.0 {
            let _ = writeln!(s, "    {:<8}  {:<8}  {:>12}", "RHS", row_name(i), num(*b));
        }
    }
    s.push_str("BOUNDS\n");
    for j in 0..n {
        let (l, u) = (p.lb[j], p.ub[j]);
        let c = col_name(j);
        let mut bound = |kind: &str, v: Option<f64>| {
            let _ = match v {
                Some(v) => writeln!(s, " {kind} {:<8}  {:<8}  {:>12}", "BND", c, num(v)),
                None => writeln!(s, " {kind} {:<8}  {c}", "BND"),
            };
        };
        if l == u {
            bound("FX", Some(l));
            continue;
        }
        match (l.is_finite(), u.is_finite()) {
            (false, false) => bound("FR", None),
            (false, true) => {
                bound("MI", None);
                bound("UP", Some(u));
            }
            (true, fin_u) => {
                if l != 0.0 {
                    bound("LO", Some(l));
                }
                if fin_u {
                    bound("UP", Some(u));
                }
            }
        }
    }
    s.push_str("ENDATA\n");
    out.write_all(s.as_bytes())
}
