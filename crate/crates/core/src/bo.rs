//! Bayesian optimization with a GP surrogate and the lower confidence bound.
//!
//! The surrogate works in the unit box: tuning points are mapped affinely from
//! their bounds before fitting, and acquisition search runs in those
//! coordinates.

use crate::error::{Error, Result};
use crate::gp::{self, GpModel, KernelParams};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Finite-difference step for acquisition gradients (unit-box coordinates).
pub const FD_STEP: f64 = 1e-6;
/// Candidates closer than this (unit-box, Euclidean) to a sample are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-9;

/// Box of tuning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Column names for traces.
    pub names: Vec<String>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let names = (0..lower.len()).map(|i| format!("x{i}")).collect();
        Self::named(lower, upper, names)
    }

    pub fn named(lower: Vec<f64>, upper: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || names.len() != lower.len() {
            return Err(Error::Dimension("bounds need matching, nonempty lower/upper/names".into()));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Config(format!("invalid interval [{l}, {u}]")));
            }
        }
        Ok(Bounds { lower, upper, names })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (v - l) / (u - l))
            .collect()
    }

    pub fn from_unit(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (l + v * (u - l)).clamp(*l, *u))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn diameter(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (u - l).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    /// LCB exploration weight.
    pub kappa: f64,
    pub n_init: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Multi-start count for the acquisition search.
    pub restarts: usize,
    pub kernel: KernelParams,
    /// Stop once an iteration improves the best value by less than this
    /// fraction. Off by default.
    pub rel_tol: Option<f64>,
    /// Replaces the Latin hypercube when set; `n_init` is then ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_points: Option<Vec<Vec<f64>>>,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            kappa: 2.6,
            n_init: 3,
            max_iter: 10,
            seed: 0,
            restarts: 20,
            kernel: KernelParams::default(),
            rel_tol: None,
            initial_points: None,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be nonnegative, got {}", self.kappa)));
        }
        if self.n_init == 0 || self.max_iter == 0 || self.restarts == 0 {
            return Err(Error::Config("n_init, max_iter and restarts must be at least 1".into()));
        }
        if let Some(t) = self.rel_tol {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("rel_tol must be nonnegative, got {t}")));
            }
        }
        if self.initial_points.as_ref().is_some_and(|p| p.is_empty()) {
            return Err(Error::Config("initial_points must not be empty".into()));
        }
        self.kernel.validate()
    }
}

impl BoConfig {
    /// Parses `key = value` lines (`#` comments). Unset keys keep their
    /// defaults; `origin` names the source in errors.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = BoConfig::default();
        let (mut lengthscale, mut nu, mut noise) =
            (cfg.kernel.lengthscale, cfg.kernel.smoothness.nu(), cfg.kernel.noise);
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let err = |msg: String| Error::ConfigLine { path: origin.to_string(), line: i + 1, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(err(format!("expected `key = value`, found `{content}`")));
            };
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return Err(err(format!("duplicate key `{k}`")));
            }
            let num = || v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| err(format!("`{k}` expects a number, found `{v}`")));
            let int = || v.parse::<u64>().map_err(|_| err(format!("`{k}` expects a nonnegative integer, found `{v}`")));
            match k {
                "kappa" => cfg.kappa = num()?,
                "n_init" => cfg.n_init = int()? as usize,
                "max_iter" => cfg.max_iter = int()? as usize,
                "seed" => cfg.seed = int()?,
                "restarts" => cfg.restarts = int()? as usize,
                "kernel.lengthscale" => lengthscale = num()?,
                "kernel.nu" => nu = num()?,
                "kernel.noise" => noise = num()?,
                "rel_tol" => cfg.rel_tol = if v == "off" { None } else { Some(num()?) },
                _ => return Err(err(format!("unknown key `{k}`"))),
            }
        }
        cfg.kernel = KernelParams::new(lengthscale, nu, noise)
            .map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        cfg.validate().map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let tol = self.rel_tol.map_or("off".to_string(), |t| t.to_string());
        format!(
            "# BO run configuration\n\
             # LCB weight\nkappa = {}\n\
             # Latin-hypercube initial points, then search iterations\nn_init = {}\nmax_iter = {}\n\
             seed = {}\n\
             # Acquisition multi-starts\nrestarts = {}\n\
             # Matern kernel on unit-box inputs; nu in {{0.5, 1.5, 2.5}}\n\
             kernel.lengthscale = {}\nkernel.nu = {}\nkernel.noise = {}\n\
             # Early stop on relative improvement below this, or `off`\nrel_tol = {}\n",
            self.kappa,
            self.n_init,
            self.max_iter,
            self.seed,
            self.restarts,
            self.kernel.lengthscale,
            self.kernel.smoothness.nu(),
            self.kernel.noise,
            tol
        )
    }
}

/// `mean - kappa * sd`.
pub fn lcb_value(mean: f64, sd: f64, kappa: f64) -> f64 {
    mean - kappa * sd
}

/// LCB at a point of the model's (unit-box) input space, on the original
/// output scale.
pub fn lcb(model: &GpModel, z: &[f64], kappa: f64) -> f64 {
    let (m, v) = model.posterior(z);
    lcb_value(m, v.sqrt(), kappa)
}

/// LCB on the standardized scale; same minimizers as [`lcb`].
fn acquisition(model: &GpModel, z: &[f64], kappa: f64) -> f64 {
    let (m, v) = model.posterior_standardized_raw(z);
    lcb_value(m, v.max(0.0).sqrt(), kappa)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Centered Latin hypercube in the unit box: coordinate `(π_j(i) + 0.5) / n`
/// for a random permutation `π_j` per dimension.
fn lhs_unit(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dim]; n];
    for j in 0..dim {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (i, p) in perm.into_iter().enumerate() {
            pts[i][j] = (p as f64 + 0.5) / n as f64;
        }
    }
    pts
}

/// Seeded Latin hypercube design over `bounds`.
pub fn initial_design(bounds: &Bounds, n_init: usize, seed: u64) -> Vec<Vec<f64>> {
    lhs_unit(n_init, bounds.dim(), &mut rng_for(seed, 0))
        .iter()
        .map(|z| bounds.from_unit(z))
        .collect()
}

/// Result of an acquisition search, in unit-box coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionResult {
    pub point: Vec<f64>,
    /// Standardized LCB at `point`.
    pub value: f64,
    /// Every start and local minimizer evaluated, best first.
    pub candidates: Vec<(Vec<f64>, f64)>,
}

fn project(z: &mut [f64]) {
    for v in z.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, z: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; z.len()];
    let mut p = z.to_vec();
    for i in 0..z.len() {
        p[i] = z[i] + FD_STEP;
        let fp = f(&p);
        p[i] = z[i] - FD_STEP;
        let fm = f(&p);
        p[i] = z[i];
        g[i] = (fp - fm) / (2.0 * FD_STEP);
    }
    g
}

/// Gradient with components that push out of the box removed.
fn projected_gradient(z: &[f64], g: &[f64]) -> Vec<f64> {
    z.iter()
        .zip(g)
        .map(|(&v, &gi)| if (v <= 0.0 && gi > 0.0) || (v >= 1.0 && gi < 0.0) { 0.0 } else { gi })
        .collect()
}

/// Projected BFGS from `start`. Returns the final point and value; never
/// worse than the start.
fn local_search(f: &dyn Fn(&[f64]) -> f64, start: &[f64]) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut z = start.to_vec();
    project(&mut z);
    let mut fz = f(&z);
    let mut g = fd_gradient(f, &z);
    let identity = |h: &mut Vec<f64>| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..d {
            h[i * d + i] = 1.0;
        }
    };
    let mut h = vec![0.0; d * d];
    identity(&mut h);

    for _ in 0..200 {
        let pg = projected_gradient(&z, &g);
        if pg.iter().all(|v| v.abs() < 1e-9) {
            break;
        }
        let mut dir: Vec<f64> = (0..d).map(|i| -(0..d).map(|j| h[i * d + j] * pg[j]).sum::<f64>()).collect();
        for i in 0..d {
            if pg[i] == 0.0 {
                dir[i] = 0.0;
            }
        }
        if dir.iter().zip(&pg).map(|(a, b)| a * b).sum::<f64>() >= 0.0 {
            identity(&mut h);
            dir = pg.iter().map(|v| -v).collect();
        }
        // Backtracking along the projected path.
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial: Vec<f64> = z.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            project(&mut trial);
            let decrease: f64 = g.iter().zip(trial.iter().zip(&z)).map(|(gi, (a, b))| gi * (a - b)).sum();
            let ft = f(&trial);
            if ft <= fz + 1e-4 * decrease && ft < fz {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((z_new, f_new)) = accepted else { break };
        let g_new = fd_gradient(f, &z_new);
        let s: Vec<f64> = z_new.iter().zip(&z).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let small = (fz - f_new).abs() <= 1e-12 * (1.0 + fz.abs());
        z = z_new;
        fz = f_new;
        g = g_new;
        if small {
            break;
        }
        if sy > 1e-12 {
            // H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..d).map(|i| (0..d).map(|j| h[i * d + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..d {
                for j in 0..d {
                    h[i * d + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
    }
    (z, fz)
}

/// Minimizes the LCB over the unit box by projected quasi-Newton from the
/// model's own inputs and `restarts` Latin-hypercube starts. Ties keep the
/// earliest candidate, so observed points come first.
pub fn minimize_acquisition(model: &GpModel, kappa: f64, restarts: usize, seed: u64) -> AcquisitionResult {
    let f = |z: &[f64]| acquisition(model, z, kappa);
    let mut rng = rng_for(seed, 1);
    let mut starts: Vec<Vec<f64>> = model.inputs().row_iter().map(|r| r.iter().copied().collect()).collect();
    starts.extend(lhs_unit(restarts, model.dim(), &mut rng));
    let mut candidates = Vec::with_capacity(2 * starts.len());
    for s in &starts {
        let fs = f(s);
        candidates.push((s.clone(), fs));
        let (z, fz) = local_search(&f, s);
        if fz < fs {
            candidates.push((z, fz));
        }
    }
    // Stable sort keeps the earlier candidate among equals.
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = candidates[0].clone();
    AcquisitionResult { point, value, candidates }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// 0 for the initial design, then 1..=max_iter.
    pub iteration: usize,
    pub phase: Phase,
    pub point: Vec<f64>,
    pub value: f64,
    pub best_so_far: f64,
    /// Wall time of the objective evaluation.
    pub seconds: f64,
}

/// Surrogate state behind one search iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpSnapshot {
    pub iteration: usize,
    pub n: usize,
    pub lengthscale: f64,
    pub nu: f64,
    pub noise: f64,
    pub jitter: f64,
    pub y_mean: f64,
    pub y_std: f64,
    /// Standardized LCB at the chosen point.
    pub acquisition: f64,
    /// The acquisition minimizer duplicated a sample and was replaced.
    pub duplicate_replaced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum TraceStatus {
    Complete,
    EarlyStop,
    Aborted(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoTrace {
    pub bounds: Bounds,
    pub config: BoConfig,
    pub samples: Vec<Sample>,
    pub snapshots: Vec<GpSnapshot>,
    pub status: TraceStatus,
}

impl BoTrace {
    pub fn best(&self) -> Option<&Sample> {
        self.samples.iter().fold(None, |best: Option<&Sample>, s| match best {
            Some(b) if b.value <= s.value => Some(b),
            _ => Some(s),
        })
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.best_so_far).collect()
    }

    /// Copy with wall times zeroed; everything else is a pure function of
    /// the seed, configuration and objective.
    pub fn without_timing(&self) -> BoTrace {
        let mut t = self.clone();
        t.samples.iter_mut().for_each(|s| s.seconds = 0.0);
        t
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Columns: iteration, one per dimension, objective, best_so_far, seconds.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["iteration".to_string()];
        header.extend(self.bounds.names.iter().cloned());
        header.extend(["objective", "best_so_far", "seconds"].map(String::from));
        w.write_record(&header)?;
        for s in &self.samples {
            let mut rec = vec![s.iteration.to_string()];
            rec.extend(s.point.iter().map(|v| v.to_string()));
            rec.extend([s.value, s.best_so_far, s.seconds].map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Called after each surrogate fit with the model (unit-box inputs), the
/// iteration number and the point about to be evaluated.
pub type Observer<'a> = dyn FnMut(&GpModel, usize, &[f64]) + 'a;

/// Runs the loop with a budget of `n_init + max_iter` evaluations.
///
/// A failing or non-finite objective stops the run; the partial trace is
/// returned inside [`Error::Tuning`].
pub fn run_bo(
    objective: &mut dyn FnMut(&[f64]) -> Result<f64>,
    bounds: &Bounds,
    config: &BoConfig,
) -> Result<BoTrace> {
    run_bo_observed(objective, bounds, config, &mut |_, _, _| {})
}

pub fn run_bo_observed(
    objective: &mut dyn FnMut(&[f64]) -> Result<f64>,
    bounds: &Bounds,
    config: &BoConfig,
    observer: &mut Observer,
) -> Result<BoTrace> {
    config.validate()?;
    let design = match &config.initial_points {
        Some(points) => {
            if let Some(p) = points.iter().find(|p| !bounds.contains(p)) {
                return Err(Error::Domain(format!("initial point {p:?} is outside the bounds")));
            }
            points.iter().map(|p| bounds.to_unit(p)).collect()
        }
        None => lhs_unit(config.n_init, bounds.dim(), &mut rng_for(config.seed, 0)),
    };
    let mut trace = BoTrace {
        bounds: bounds.clone(),
        config: config.clone(),
        samples: Vec::new(),
        snapshots: Vec::with_capacity(config.max_iter),
        status: TraceStatus::Complete,
    };
    let mut unit: Vec<Vec<f64>> = Vec::new();

    let mut evaluate = |trace: &mut BoTrace, z: Vec<f64>, iteration: usize, phase: Phase| -> Result<()> {
        let x = bounds.from_unit(&z);
        let t0 = Instant::now();
        let value = match objective(&x) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => {
                let reason = format!("objective returned {v} at {x:?}");
                trace.status = TraceStatus::Aborted(reason.clone());
                return Err(Error::Tuning { reason, trace: Box::new(trace.clone()) });
            }
            Err(e) => {
                let reason = format!("objective failed at {x:?}: {e}");
                trace.status = TraceStatus::Aborted(reason.clone());
                return Err(Error::Tuning { reason, trace: Box::new(trace.clone()) });
            }
        };
        let best = trace.samples.last().map_or(value, |s| s.best_so_far.min(value));
        trace.samples.push(Sample {
            iteration,
            phase,
            point: x,
            value,
            best_so_far: best,
            seconds: t0.elapsed().as_secs_f64(),
        });
        unit.push(z);
        Ok(())
    };

    for z in design {
        evaluate(&mut trace, z, 0, Phase::Init)?;
    }

    for it in 1..=config.max_iter {
        let n = trace.samples.len();
        let x = DMatrix::from_fn(n, bounds.dim(), |i, j| bounds.to_unit(&trace.samples[i].point)[j]);
        let y: Vec<f64> = trace.samples.iter().map(|s| s.value).collect();
        let model = gp::fit(x, &y, config.kernel)?;
        let acq = minimize_acquisition(&model, config.kappa, config.restarts, config.seed.wrapping_add(it as u64));
        let is_dup = |z: &[f64]| {
            model.inputs().row_iter().any(|r| {
                r.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= DUPLICATE_TOL
            })
        };
        let (next, value, replaced) = if is_dup(&acq.point) {
            match acq.candidates.iter().find(|(z, _)| !is_dup(z)) {
                Some((z, v)) => (z.clone(), *v, true),
                None => (acq.point.clone(), acq.value, false),
            }
        } else {
            (acq.point.clone(), acq.value, false)
        };
        let (y_mean, y_std) = model.standardization();
        trace.snapshots.push(GpSnapshot {
            iteration: it,
            n,
            lengthscale: config.kernel.lengthscale,
            nu: config.kernel.smoothness.nu(),
            noise: config.kernel.noise,
            jitter: model.jitter(),
            y_mean,
            y_std,
            acquisition: value,
            duplicate_replaced: replaced,
        });
        observer(&model, it, &bounds.from_unit(&next));
        let before = trace.samples.last().map(|s| s.best_so_far).unwrap_or(f64::INFINITY);
        evaluate(&mut trace, next, it, Phase::Search)?;
        if let Some(tol) = config.rel_tol {
            let after = trace.samples.last().map(|s| s.best_so_far).unwrap_or(before);
            if before - after < tol * before.abs() && it < config.max_iter {
                trace.status = TraceStatus::EarlyStop;
                break;
            }
        }
    }
    Ok(trace)
}

/// Posterior mean and standard deviation on an `n`×`n` grid over a 2-D box,
/// original scales. Rows are `(x0, x1, mean, sd)` with `x0` varying slowest.
pub fn posterior_grid(model: &GpModel, bounds: &Bounds, n: usize) -> Result<Vec<[f64; 4]>> {
    if bounds.dim() != 2 || n < 2 {
        return Err(Error::Dimension("posterior grid needs a 2-D box and n >= 2".into()));
    }
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64];
            let x = bounds.from_unit(&z);
            let (m, v) = model.posterior(&z);
            out.push([x[0], x[1], m, v.sqrt()]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcb_substitution() {
        assert!((lcb_value(2.0, 1.0, 2.6) + 0.6).abs() < 1e-12);
        assert_eq!(lcb_value(2.0, 1.0, 0.0), 2.0);
    }

    #[test]
    fn bounds_round_trip() {
        let b = Bounds::new(vec![0.0, -1.0], vec![0.5, 1.0]).unwrap();
        let x = [0.2, 0.3];
        let back = b.from_unit(&b.to_unit(&x));
        assert!((back[0] - 0.2).abs() < 1e-15 && (back[1] - 0.3).abs() < 1e-15);
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn projected_bfgs_finds_a_bound_constrained_minimum() {
        let f = |z: &[f64]| (z[0] - 1.4).powi(2) + 3.0 * (z[1] - 0.3).powi(2);
        let (z, _) = local_search(&f, &[0.5, 0.9]);
        assert!((z[0] - 1.0).abs() < 1e-9);
        assert!((z[1] - 0.3).abs() < 1e-5);
    }

    #[test]
    fn config_text_round_trip() {
        let cfg = BoConfig { kappa: 1.5, seed: 9, rel_tol: Some(0.01), ..Default::default() };
        assert_eq!(BoConfig::parse(&cfg.to_text(), "t").unwrap(), cfg);
        assert_eq!(BoConfig::parse("", "t").unwrap(), BoConfig::default());
        assert!(matches!(BoConfig::parse("kappa = x", "t"), Err(Error::ConfigLine { line: 1, .. })));
        assert!(BoConfig::parse("\nfoo = 1", "t").is_err());
        assert!(BoConfig::parse("kernel.nu = 2", "t").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(BoConfig::default().validate().is_ok());
        assert!(BoConfig { kappa: -1.0, ..Default::default() }.validate().is_err());
        assert!(BoConfig { n_init: 0, ..Default::default() }.validate().is_err());
        assert!(BoConfig { restarts: 0, ..Default::default() }.validate().is_err());
    }
}
