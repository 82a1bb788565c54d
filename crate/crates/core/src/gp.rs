//! Exact Gaussian-process regression with half-integer Matérn kernels.
//!
//! Inputs are expected in the unit box (the BO layer normalizes them) and
//! outputs are standardized internally, so the zero prior mean refers to the
//! standardized scale. Queries return mean and variance on the original scale.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// First diagonal jitter tried when the covariance is not numerically PD.
pub const JITTER_START: f64 = 1e-10;
/// Largest diagonal jitter before giving up.
pub const JITTER_MAX: f64 = 1e-4;

/// Smoothness ν of the Matérn family; only the closed-form half-integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl Smoothness {
    pub fn from_nu(nu: f64) -> Result<Self> {
        match nu {
            0.5 => Ok(Smoothness::Half),
            1.5 => Ok(Smoothness::ThreeHalves),
            2.5 => Ok(Smoothness::FiveHalves),
            other => Err(Error::Config(format!(
                "unsupported Matérn smoothness nu={other}; expected 0.5, 1.5 or 2.5"
            ))),
        }
    }

    pub fn nu(self) -> f64 {
        match self {
            Smoothness::Half => 0.5,
            Smoothness::ThreeHalves => 1.5,
            Smoothness::FiveHalves => 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub lengthscale: f64,
    pub smoothness: Smoothness,
    /// Observation noise variance σ² (standardized output scale).
    pub noise: f64,
}

impl Default for KernelParams {
    /// `matern52` with l = 1 and σ² = 1e-6.
    fn default() -> Self {
        KernelParams {
            lengthscale: 1.0,
            smoothness: Smoothness::FiveHalves,
            noise: 1e-6,
        }
    }
}

impl KernelParams {
    pub fn new(lengthscale: f64, nu: f64, noise: f64) -> Result<Self> {
        let p = KernelParams {
            lengthscale,
            smoothness: Smoothness::from_nu(nu)?,
            noise,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lengthscale > 0.0 && self.lengthscale.is_finite()) {
            return Err(Error::Config(format!(
                "lengthscale must be positive, got {}",
                self.lengthscale
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!(
                "noise variance must be nonnegative, got {}",
                self.noise
            )));
        }
        Ok(())
    }
}

/// Matérn covariance at distance `d` (unit signal variance).
pub fn matern(d: f64, params: &KernelParams) -> f64 {
    debug_assert!(d >= 0.0);
    let r = d / params.lengthscale;
    match params.smoothness {
        Smoothness::Half => (-r).exp(),
        Smoothness::ThreeHalves => {
            let s = 3f64.sqrt() * r;
            (1.0 + s) * (-s).exp()
        }
        Smoothness::FiveHalves => {
            let s = 5f64.sqrt() * r;
            (1.0 + s + 5.0 * r * r / 3.0) * (-s).exp()
        }
    }
}

fn distance(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// Cross-covariance matrix between the rows of `a` and the rows of `b`.
pub fn kernel_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>, params: &KernelParams) -> Result<DMatrix<f64>> {
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::Dimension("kernel matrix of an empty point set".into()));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::Dimension(format!(
            "points have dimension {} and {}",
            a.ncols(),
            b.ncols()
        )));
    }
    Ok(DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        matern(distance(a.row(i).iter().copied(), b.row(j).iter().copied()), params)
    }))
}

/// Lower Cholesky factor; `None` when a pivot is not safely positive.
fn cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let scale = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)].abs())).max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 1e-14 * scale) {
            return None;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// A fitted GP. Immutable; queries are read-only.
#[derive(Debug, Clone)]
pub struct GpModel {
    x: DMatrix<f64>,
    y: DVector<f64>,
    params: KernelParams,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
    y_mean: f64,
    y_std: f64,
    jitter: f64,
}

/// Fits a GP to `x` (n×d, rows in the unit box) and observations `y`.
pub fn fit(x: DMatrix<f64>, y: &[f64], params: KernelParams) -> Result<GpModel> {
    params.validate()?;
    let n = x.nrows();
    if n == 0 {
        return Err(Error::Dimension("GP needs at least one observation".into()));
    }
    if y.len() != n {
        return Err(Error::Dimension(format!("{n} inputs but {} outputs", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite observation".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite input".into()));
    }

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
    let mut y_std = var.sqrt();
    if n == 1 || y_std <= 1e-12 * y_mean.abs().max(1.0) {
        y_std = 1.0;
    }
    let ys = DVector::from_iterator(n, y.iter().map(|v| (v - y_mean) / y_std));

    let k = kernel_matrix(&x, &x, &params)?;
    let mut jitter = 0.0;
    let chol = loop {
        let mut a = k.clone();
        for i in 0..n {
            a[(i, i)] += params.noise + jitter;
        }
        if let Some(l) = cholesky(&a) {
            break l;
        }
        jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
        if jitter > JITTER_MAX * (1.0 + 1e-9) {
            return Err(Error::Numerical(format!(
                "covariance of {n} points not positive definite with jitter up to {JITTER_MAX:e} \
                 (noise {}, lengthscale {})",
                params.noise, params.lengthscale
            )));
        }
    };

    let z = chol
        .solve_lower_triangular(&ys)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let alpha = chol
        .tr_solve_lower_triangular(&z)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;

    Ok(GpModel {
        x,
        y: ys,
        params,
        chol,
        alpha,
        y_mean,
        y_std,
        jitter,
    })
}

impl GpModel {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Diagonal jitter that was needed to factorize (0 when none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn standardized_targets(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_std)
    }

    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Posterior mean and variance on the standardized scale, variance before
    /// clamping.
    pub fn posterior_standardized_raw(&self, q: &[f64]) -> (f64, f64) {
        assert_eq!(q.len(), self.dim(), "query dimension mismatch");
        let n = self.n();
        let mut kq = vec![0.0; n];
        for (i, kv) in kq.iter_mut().enumerate() {
            *kv = matern(distance(self.x.row(i).iter().copied(), q.iter().copied()), &self.params);
        }
        let mean = kq.iter().zip(self.alpha.iter()).map(|(a, b)| a * b).sum::<f64>();
        // Forward substitution chol·v = k.
        let mut v = kq;
        for i in 0..n {
            let mut s = v[i];
            for j in 0..i {
                s -= self.chol[(i, j)] * v[j];
            }
            v[i] = s / self.chol[(i, i)];
        }
        let vtv: f64 = v.iter().map(|a| a * a).sum();
        (mean, 1.0 + self.params.noise - vtv)
    }

    /// Posterior `(mean, variance)` at `q` on the original output scale.
    pub fn posterior(&self, q: &[f64]) -> (f64, f64) {
        let (m, v) = self.posterior_standardized_raw(q);
        (
            self.y_mean + self.y_std * m,
            v.max(0.0) * self.y_std * self.y_std,
        )
    }
}
