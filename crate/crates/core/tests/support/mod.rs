//! Independent reference implementations used by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use mpctune::gp::{matern, KernelParams};
use mpctune::lp::LpProblem;
use mpctune::sim::BackoffCase;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Solves a small dense square system with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            for c in k..n {
                a[i][c] -= f * a[k][c];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|c| a[i][c] * x[c]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        out(cur);
        return;
    }
    for i in start..n {
        if n - i < k - cur.len() {
            break;
        }
        cur.push(i);
        combinations(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Minimum objective over all feasible basic solutions of a problem with a
/// finite box. `None` means no feasible vertex (infeasible).
pub fn vertex_enumeration(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    let dense = |row: &Vec<(usize, f64)>| {
        let mut r = vec![0.0; n];
        for &(j, a) in row {
            r[j] += a;
        }
        r
    };
    let eq: Vec<(Vec<f64>, f64)> = p.a_eq.iter().map(dense).zip(p.b_eq.iter().copied()).collect();
    let mut ineq: Vec<(Vec<f64>, f64)> = p.a_ub.iter().map(dense).zip(p.b_ub.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        ineq.push((e.clone(), p.ub[j]));
        e[j] = -1.0;
        ineq.push((e, -p.lb[j]));
    }
    let feasible = |x: &[f64]| {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        eq.iter().all(|(r, b)| (dot(r) - b).abs() <= 1e-8)
            && ineq.iter().all(|(r, b)| dot(r) <= b + 1e-8)
    };
    if eq.len() > n {
        return None;
    }
    let mut best: Option<f64> = None;
    let k = n - eq.len();
    combinations(ineq.len(), k, 0, &mut Vec::new(), &mut |idx| {
        let mut a: Vec<Vec<f64>> = eq.iter().map(|(r, _)| r.clone()).collect();
        let mut b: Vec<f64> = eq.iter().map(|(_, v)| *v).collect();
        for &i in idx {
            a.push(ineq[i].0.clone());
            b.push(ineq[i].1);
        }
        if let Some(x) = gauss_solve(a, b) {
            if feasible(&x) {
                let obj: f64 = p.c.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(obj, |o: f64| o.min(obj)));
            }
        }
    });
    best
}

/// Random LP with `n <= 6` variables, a finite box and `<= 8` rows.
pub fn random_small_lp(rng: &mut impl Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let m_ub = rng.gen_range(0..=8);
    let m_eq = rng.gen_range(0..=2usize).min(8 - m_ub).min(n);
    let mut p = LpProblem::default();
    for j in 0..n {
        let lb = rng.gen_range(-2.0..0.5);
        let ub = lb + rng.gen_range(0.1..3.0);
        p.add_var(format!("x{j}"), lb, ub, rng.gen_range(-1.0..1.0));
    }
    let row = |rng: &mut dyn rand::RngCore| -> Vec<(usize, f64)> {
        (0..n)
            .filter_map(|j| {
                if rng.gen_bool(0.8) {
                    Some((j, rng.gen_range(-1.0..1.0)))
                } else {
                    None
                }
            })
            .collect()
    };
    for i in 0..m_ub {
        let r = row(rng);
        p.add_le(format!("u{i}"), r, rng.gen_range(-0.5..2.0));
    }
    for i in 0..m_eq {
        let r = row(rng);
        p.add_eq(format!("e{i}"), r, rng.gen_range(-0.5..0.5));
    }
    p
}

/// Posterior via an explicit inverse of `K + σ²I`, on the standardized scale.
pub fn explicit_posterior(
    x: &DMatrix<f64>,
    y_std: &DVector<f64>,
    params: &KernelParams,
    jitter: f64,
    q: &[f64],
) -> (f64, f64) {
    let n = x.nrows();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().copied().collect()).collect();
    let mut k = DMatrix::from_fn(n, n, |i, j| matern(dist(&rows[i], &rows[j]), params));
    for i in 0..n {
        k[(i, i)] += params.noise + jitter;
    }
    let kinv = k.try_inverse().expect("invertible");
    let kq = DVector::from_fn(n, |i, _| matern(dist(&rows[i], q), params));
    let mean = (kq.transpose() * &kinv * y_std)[(0, 0)];
    let var = 1.0 + params.noise - (kq.transpose() * &kinv * &kq)[(0, 0)];
    (mean, var)
}

/// Cases whose defining inequalities hold, in the order they are listed.
pub fn matching_cases(e: f64, beta: f64, cap: f64) -> Vec<BackoffCase> {
    let (lo, hi) = (beta * cap, (1.0 - beta) * cap);
    let mut out = Vec::new();
    if lo <= e && e <= hi {
        out.push(BackoffCase::InBand);
    }
    if hi < e && e <= cap {
        out.push(BackoffCase::AboveBand);
    }
    if 0.0 <= e && e < lo {
        out.push(BackoffCase::BelowBand);
    }
    if e > cap {
        out.push(BackoffCase::Overflow);
    }
    if e < 0.0 {
        out.push(BackoffCase::DryUp);
    }
    out
}
