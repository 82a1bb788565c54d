//! C ABI over `mpctune`.
//!
//! Objects are opaque handles created by `*_new`/`*_fit`/`*_read` style calls
//! and released with the matching `*_free`. Every fallible call returns an
//! [`MpctuneStatus`]; on failure [`mpctune_last_error`] describes it. Output
//! pointers are written only on success unless documented otherwise.

#![allow(clippy::missing_safety_doc)]

use mpctune::bo::{self, BoConfig, BoTrace, Bounds};
use mpctune::gp::{self, GpModel, KernelParams};
use mpctune::lp::{LpProblem, LpStatus};
use mpctune::objective::{self, CostGrid};
use mpctune::plant::{BackoffTerms, PlantConfig};
use mpctune::sim::{self, BackoffCase, DisturbanceSeries, ViolationKind};
use mpctune::Error;
use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpctuneStatus {
    Ok = 0,
    NullArgument = 1,
    Config = 2,
    Numerical = 3,
    /// Results are incomplete; the output handle, if any, holds what was
    /// computed.
    Partial = 4,
    Domain = 5,
    Dimension = 6,
    Io = 7,
    Objective = 8,
    Panic = 9,
}

struct Failure(MpctuneStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) | Error::ConfigLine { .. } => MpctuneStatus::Config,
            Error::Dimension(_) => MpctuneStatus::Dimension,
            Error::Numerical(_) | Error::Solver(_) | Error::Aborted(_) => MpctuneStatus::Numerical,
            Error::Tuning { .. } => MpctuneStatus::Partial,
            Error::Domain(_) => MpctuneStatus::Domain,
            Error::Objective(_) => MpctuneStatus::Objective,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => MpctuneStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> MpctuneStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MpctuneStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            MpctuneStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MpctuneStatus::NullArgument, format!("{what} is null"))
}

unsafe fn href<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn hmut<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string(p: *const c_char, what: &str) -> FfiResult<String> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(MpctuneStatus::Config, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, v: T) -> FfiResult<()> {
    put(out, Box::into_raw(Box::new(v)), "output handle")
}

unsafe fn drop_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mpctune_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn mpctune_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mpctune_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------- GP

pub struct MpctuneGp(GpModel);

/// Fits a GP to `n` points of dimension `d` (row-major `x`, inputs in the
/// unit box) with targets `y`. `nu` is 0.5, 1.5 or 2.5.
#[no_mangle]
pub unsafe extern "C" fn mpctune_gp_fit(
    x: *const f64,
    n: usize,
    d: usize,
    y: *const f64,
    lengthscale: f64,
    nu: f64,
    noise: f64,
    out: *mut *mut MpctuneGp,
) -> MpctuneStatus {
    guard(|| {
        let xs = slice(x, n * d, "x")?;
        let ys = slice(y, n, "y")?;
        let params = KernelParams::new(lengthscale, nu, noise)?;
        let m = gp::fit(nalgebra::DMatrix::from_row_slice(n, d, xs), ys, params)?;
        put_handle(out, MpctuneGp(m))
    })
}

/// Posterior mean and variance at `q` (length `d`), original output scale.
#[no_mangle]
pub unsafe extern "C" fn mpctune_gp_posterior(
    gp: *const MpctuneGp,
    q: *const f64,
    d: usize,
    mean: *mut f64,
    variance: *mut f64,
) -> MpctuneStatus {
    guard(|| {
        let m = &href(gp, "gp")?.0;
        let q = slice(q, d, "q")?;
        if d != m.dim() {
            return Err(Error::Dimension(format!("query has {d} coordinates, model {}", m.dim())).into());
        }
        let (mu, var) = m.posterior(q);
        put(mean, mu, "mean")?;
        put(variance, var, "variance")
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_gp_free(gp: *mut MpctuneGp) {
    drop_handle(gp)
}

// ---------------------------------------------------------------- back-off

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpctuneBackoffCase {
    InBand = 0,
    AboveBand = 1,
    BelowBand = 2,
    Overflow = 3,
    DryUp = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpctuneTankUpdate {
    pub soc: f64,
    pub lower: f64,
    pub upper: f64,
    pub update_case: MpctuneBackoffCase,
    pub overflow: f64,
    pub deficit: f64,
}

/// Storage bound update for one tank after the plant reaches `soc_next`.
#[no_mangle]
pub unsafe extern "C" fn mpctune_backoff_update(
    soc_next: f64,
    beta: f64,
    capacity: f64,
    out: *mut MpctuneTankUpdate,
) -> MpctuneStatus {
    guard(|| {
        if !(soc_next.is_finite() && capacity.is_finite() && capacity > 0.0) {
            return Err(Error::Domain(format!("soc {soc_next}, capacity {capacity}")).into());
        }
        BackoffTerms::new(beta, beta)?;
        let u = sim::update_tank(soc_next, beta, capacity);
        let update_case = match u.case {
            BackoffCase::InBand => MpctuneBackoffCase::InBand,
            BackoffCase::AboveBand => MpctuneBackoffCase::AboveBand,
            BackoffCase::BelowBand => MpctuneBackoffCase::BelowBand,
            BackoffCase::Overflow => MpctuneBackoffCase::Overflow,
            BackoffCase::DryUp => MpctuneBackoffCase::DryUp,
        };
        let r = MpctuneTankUpdate {
            soc: u.soc,
            lower: u.bounds.lower,
            upper: u.bounds.upper,
            update_case,
            overflow: u.overflow,
            deficit: u.deficit,
        };
        put(out, r, "out")
    })
}

// ---------------------------------------------------------------- LP

pub struct MpctuneLp(LpProblem);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpctuneRowSense {
    LessEqual = 0,
    GreaterEqual = 1,
    Equal = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpctuneLpStatus {
    Optimal = 0,
    Infeasible = 1,
    Unbounded = 2,
}

/// Empty minimization problem.
#[no_mangle]
pub unsafe extern "C" fn mpctune_lp_new(out: *mut *mut MpctuneLp) -> MpctuneStatus {
    guard(|| put_handle(out, MpctuneLp(LpProblem::default())))
}

/// Adds a variable with bounds (±INFINITY allowed) and cost; writes its index.
#[no_mangle]
pub unsafe extern "C" fn mpctune_lp_add_var(
    lp: *mut MpctuneLp,
    lower: f64,
    upper: f64,
    cost: f64,
    index: *mut usize,
) -> MpctuneStatus {
    guard(|| {
        let p = &mut hmut(lp, "lp")?.0;
        let j = p.num_vars();
        let j = p.add_var(format!("x{j}"), lower, upper, cost);
        if !index.is_null() {
            index.write(j);
        }
        Ok(())
    })
}

/// Adds `sum(values[k] * x[indices[k]]) <sense> rhs`.
#[no_mangle]
pub unsafe extern "C" fn mpctune_lp_add_row(
    lp: *mut MpctuneLp,
    sense: MpctuneRowSense,
    indices: *const usize,
    values: *const f64,
    nnz: usize,
    rhs: f64,
) -> MpctuneStatus {
    guard(|| {
        let p = &mut hmut(lp, "lp")?.0;
        let idx = slice(indices, nnz, "indices")?;
        let val = slice(values, nnz, "values")?;
        if let Some(j) = idx.iter().find(|&&j| j >= p.num_vars()) {
            return Err(Error::Dimension(format!("variable {j} does not exist")).into());
        }
        let row: Vec<(usize, f64)> = idx.iter().copied().zip(val.iter().copied()).collect();
        let name = format!("r{}", p.num_rows());
        match sense {
            MpctuneRowSense::LessEqual => p.add_le(name, row, rhs),
            MpctuneRowSense::GreaterEqual => p.add_ge(name, row, rhs),
            MpctuneRowSense::Equal => p.add_eq(name, row, rhs),
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_lp_num_vars(lp: *const MpctuneLp) -> usize {
    lp.as_ref().map_or(0, |p| p.0.num_vars())
}

/// Solves with the built-in simplex. `x` (length `n`, may be null) receives
/// the primal solution when optimal.
#[no_mangle]
pub unsafe extern "C" fn mpctune_lp_solve(
    lp: *const MpctuneLp,
    status: *mut MpctuneLpStatus,
    x: *mut f64,
    n: usize,
    objective: *mut f64,
    iterations: *mut usize,
) -> MpctuneStatus {
    guard(|| {
        let p = &href(lp, "lp")?.0;
        let s = mpctune::lp::solve(p)?;
        let st = match s.status {
            LpStatus::Optimal => MpctuneLpStatus::Optimal,
            LpStatus::Infeasible => MpctuneLpStatus::Infeasible,
            LpStatus::Unbounded => MpctuneLpStatus::Unbounded,
        };
        put(status, st, "status")?;
        if !x.is_null() && s.status == LpStatus::Optimal {
            if n < s.x.len() {
                return Err(Error::Dimension(format!("x holds {n} values, problem has {}", s.x.len())).into());
            }
            std::ptr::copy_nonoverlapping(s.x.as_ptr(), x, s.x.len());
        }
        if !objective.is_null() {
            objective.write(s.objective);
        }
        if !iterations.is_null() {
            iterations.write(s.iterations);
        }
        Ok(())
    })
}

/// Writes the problem in fixed-format MPS.
#[no_mangle]
pub unsafe extern "C" fn mpctune_lp_write_mps(lp: *const MpctuneLp, path: *const c_char) -> MpctuneStatus {
    guard(|| {
        let p = &href(lp, "lp")?.0;
        let path = string(path, "path")?;
        let f = std::fs::File::create(&path).map_err(Error::from)?;
        mpctune::lp::write_mps(p, "FFI", std::io::BufWriter::new(f)).map_err(Error::from)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_lp_free(lp: *mut MpctuneLp) {
    drop_handle(lp)
}

// ---------------------------------------------------------------- plant and series

pub struct MpctunePlantConfig(PlantConfig);
pub struct MpctuneSeries(DisturbanceSeries);

#[no_mangle]
pub unsafe extern "C" fn mpctune_config_default(out: *mut *mut MpctunePlantConfig) -> MpctuneStatus {
    guard(|| put_handle(out, MpctunePlantConfig(PlantConfig::default())))
}

/// Parses configuration text in the file format.
#[no_mangle]
pub unsafe extern "C" fn mpctune_config_parse(
    text: *const c_char,
    out: *mut *mut MpctunePlantConfig,
) -> MpctuneStatus {
    guard(|| {
        let text = string(text, "text")?;
        put_handle(out, MpctunePlantConfig(PlantConfig::parse(&text, "<text>")?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_config_from_file(
    path: *const c_char,
    out: *mut *mut MpctunePlantConfig,
) -> MpctuneStatus {
    guard(|| {
        let path = string(path, "path")?;
        put_handle(out, MpctunePlantConfig(PlantConfig::from_file(path)?))
    })
}

/// The configuration in the file format; free with [`mpctune_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mpctune_config_to_text(cfg: *const MpctunePlantConfig, out: *mut *mut c_char) -> MpctuneStatus {
    guard(|| {
        let text = href(cfg, "config")?.0.to_text();
        put(out, CString::new(text).expect("no interior NUL").into_raw(), "out")
    })
}

/// Sets the prediction horizon (hours). The change is validated and rolled
/// back on failure.
#[no_mangle]
pub unsafe extern "C" fn mpctune_config_set_horizon(cfg: *mut MpctunePlantConfig, horizon: usize) -> MpctuneStatus {
    guard(|| {
        let c = &mut hmut(cfg, "config")?.0;
        let candidate = PlantConfig { horizon, ..c.clone() };
        candidate.validate()?;
        *c = candidate;
        Ok(())
    })
}

/// Sets the forecast error level and its seed. Zero noise gives perfect
/// forecasts.
#[no_mangle]
pub unsafe extern "C" fn mpctune_config_set_forecast(
    cfg: *mut MpctunePlantConfig,
    noise: f64,
    seed: u64,
) -> MpctuneStatus {
    guard(|| {
        let c = &mut hmut(cfg, "config")?.0;
        let candidate = PlantConfig { forecast_noise: noise, forecast_seed: seed, ..c.clone() };
        candidate.validate()?;
        *c = candidate;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_config_free(cfg: *mut MpctunePlantConfig) {
    drop_handle(cfg)
}

/// Synthetic campus series of `hours` hours.
#[no_mangle]
pub unsafe extern "C" fn mpctune_series_fixture(hours: usize, seed: u64, out: *mut *mut MpctuneSeries) -> MpctuneStatus {
    guard(|| put_handle(out, MpctuneSeries(sim::campus_fixture(hours, seed))))
}

/// All-zero loads and prices.
#[no_mangle]
pub unsafe extern "C" fn mpctune_series_zero(hours: usize, out: *mut *mut MpctuneSeries) -> MpctuneStatus {
    guard(|| put_handle(out, MpctuneSeries(sim::zero_fixture(hours))))
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_series_read_csv(path: *const c_char, out: *mut *mut MpctuneSeries) -> MpctuneStatus {
    guard(|| {
        let path = string(path, "path")?;
        put_handle(out, MpctuneSeries(DisturbanceSeries::read_csv(path)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_series_len(series: *const MpctuneSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_series_free(series: *mut MpctuneSeries) {
    drop_handle(series)
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MpctuneSimSummary {
    pub total_cost: f64,
    pub electricity: f64,
    pub demand: f64,
    pub water: f64,
    pub gas: f64,
    pub slack_penalty: f64,
    pub hours: usize,
    pub overflow_events: usize,
    pub dry_up_events: usize,
}

/// Closed-loop simulation of `span_hours` hours. When `out_dir` is not null
/// the result files are written there as well.
#[no_mangle]
pub unsafe extern "C" fn mpctune_simulate(
    cfg: *const MpctunePlantConfig,
    series: *const MpctuneSeries,
    beta_cw: f64,
    beta_hw: f64,
    span_hours: usize,
    out_dir: *const c_char,
    summary: *mut MpctuneSimSummary,
) -> MpctuneStatus {
    guard(|| {
        let cfg = &href(cfg, "config")?.0;
        let series = &href(series, "series")?.0;
        let r = sim::simulate(cfg, series, BackoffTerms::new(beta_cw, beta_hw)?, span_hours)?;
        if !out_dir.is_null() {
            r.write_outputs(&PathBuf::from(string(out_dir, "out_dir")?))?;
        }
        let count = |k: ViolationKind| r.violations.iter().filter(|v| v.kind == k).count();
        let s = MpctuneSimSummary {
            total_cost: r.total_cost,
            electricity: r.breakdown.electricity,
            demand: r.breakdown.demand,
            water: r.breakdown.water,
            gas: r.breakdown.gas,
            slack_penalty: r.breakdown.slack_penalty,
            hours: r.hours,
            overflow_events: count(ViolationKind::Overflow),
            dry_up_events: count(ViolationKind::DryUp),
        };
        put(summary, s, "summary")
    })
}

// ---------------------------------------------------------------- cost grid

pub struct MpctuneGrid(CostGrid);

/// Simulates every knot pair. On [`MpctuneStatus::Partial`] the handle is
/// still written and holds the incomplete grid.
#[no_mangle]
pub unsafe extern "C" fn mpctune_grid_evaluate(
    cfg: *const MpctunePlantConfig,
    series: *const MpctuneSeries,
    knots_cw: *const f64,
    n_cw: usize,
    knots_hw: *const f64,
    n_hw: usize,
    span_hours: usize,
    out: *mut *mut MpctuneGrid,
) -> MpctuneStatus {
    guard(|| {
        let cfg = &href(cfg, "config")?.0;
        let series = &href(series, "series")?.0;
        let a = slice(knots_cw, n_cw, "knots_cw")?;
        let b = slice(knots_hw, n_hw, "knots_hw")?;
        objective::validate_knots(a)?;
        objective::validate_knots(b)?;
        if out.is_null() {
            return Err(null("output handle"));
        }
        match objective::grid_evaluate(cfg, series, a, b, span_hours) {
            Ok(g) => put_handle(out, MpctuneGrid(g)),
            Err(f) => {
                let msg = format!("{} of {} knots failed; first: {}", f.failures.len(), n_cw * n_hw, f.failures[0].2);
                put_handle(out, MpctuneGrid(f.grid))?;
                Err(Failure(MpctuneStatus::Partial, msg))
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_grid_read(path: *const c_char, out: *mut *mut MpctuneGrid) -> MpctuneStatus {
    guard(|| {
        let path = string(path, "path")?;
        put_handle(out, MpctuneGrid(CostGrid::read(std::path::Path::new(&path))?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_grid_write(grid: *const MpctuneGrid, path: *const c_char) -> MpctuneStatus {
    guard(|| {
        let g = &href(grid, "grid")?.0;
        Ok(g.write(std::path::Path::new(&string(path, "path")?))?)
    })
}

/// Bilinear interpolation inside the knot hull.
#[no_mangle]
pub unsafe extern "C" fn mpctune_grid_interpolate(
    grid: *const MpctuneGrid,
    beta_cw: f64,
    beta_hw: f64,
    value: *mut f64,
) -> MpctuneStatus {
    guard(|| {
        let v = href(grid, "grid")?.0.interpolate(beta_cw, beta_hw)?;
        put(value, v, "value")
    })
}

/// Smallest stored cost and where it sits.
#[no_mangle]
pub unsafe extern "C" fn mpctune_grid_min(
    grid: *const MpctuneGrid,
    value: *mut f64,
    beta_cw: *mut f64,
    beta_hw: *mut f64,
) -> MpctuneStatus {
    guard(|| {
        let (v, a, b) = href(grid, "grid")?
            .0
            .min()
            .ok_or_else(|| Failure(MpctuneStatus::Objective, "grid has no values".into()))?;
        put(value, v, "value")?;
        put(beta_cw, a, "beta_cw")?;
        put(beta_hw, b, "beta_hw")
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_grid_free(grid: *mut MpctuneGrid) {
    drop_handle(grid)
}

// ---------------------------------------------------------------- BO

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpctuneBoConfig {
    pub kappa: f64,
    pub n_init: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub restarts: usize,
    pub lengthscale: f64,
    pub nu: f64,
    pub noise: f64,
    /// Early-stop threshold on relative improvement; zero or negative
    /// disables it.
    pub rel_tol: f64,
}

#[no_mangle]
pub extern "C" fn mpctune_bo_config_default() -> MpctuneBoConfig {
    let d = BoConfig::default();
    MpctuneBoConfig {
        kappa: d.kappa,
        n_init: d.n_init,
        max_iter: d.max_iter,
        seed: d.seed,
        restarts: d.restarts,
        lengthscale: d.kernel.lengthscale,
        nu: d.kernel.smoothness.nu(),
        noise: d.kernel.noise,
        rel_tol: 0.0,
    }
}

/// Objective callback: writes the value at `x` (length `d`) to `value` and
/// returns 0, or returns nonzero to stop the run.
pub type MpctuneObjective =
    Option<unsafe extern "C" fn(user: *mut c_void, x: *const f64, d: usize, value: *mut f64) -> c_int>;

pub struct MpctuneTrace(BoTrace);

/// Minimizes `objective` over the box `[lower, upper]` (length `d`). On
/// [`MpctuneStatus::Partial`] (callback failure or non-finite value) the
/// handle is still written with the partial trace.
#[no_mangle]
pub unsafe extern "C" fn mpctune_bo_run(
    lower: *const f64,
    upper: *const f64,
    d: usize,
    config: *const MpctuneBoConfig,
    objective: MpctuneObjective,
    user: *mut c_void,
    out: *mut *mut MpctuneTrace,
) -> MpctuneStatus {
    guard(|| {
        let c = href(config, "config")?;
        let f = objective.ok_or_else(|| null("objective"))?;
        if out.is_null() {
            return Err(null("output handle"));
        }
        let bounds = Bounds::new(slice(lower, d, "lower")?.to_vec(), slice(upper, d, "upper")?.to_vec())?;
        let cfg = BoConfig {
            kappa: c.kappa,
            n_init: c.n_init,
            max_iter: c.max_iter,
            seed: c.seed,
            restarts: c.restarts,
            kernel: KernelParams::new(c.lengthscale, c.nu, c.noise)?,
            rel_tol: (c.rel_tol > 0.0).then_some(c.rel_tol),
            initial_points: None,
        };
        let mut call = |x: &[f64]| -> mpctune::Result<f64> {
            let mut v = f64::NAN;
            match f(user, x.as_ptr(), x.len(), &mut v) {
                0 => Ok(v),
                code => Err(Error::Objective(format!("callback returned {code}"))),
            }
        };
        match bo::run_bo(&mut call, &bounds, &cfg) {
            Ok(t) => put_handle(out, MpctuneTrace(t)),
            Err(Error::Tuning { reason, trace }) => {
                put_handle(out, MpctuneTrace(*trace))?;
                Err(Failure(MpctuneStatus::Partial, reason))
            }
            Err(e) => Err(e.into()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_trace_len(trace: *const MpctuneTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Sample `i`: point (into `point`, length `d`), objective value and running
/// minimum.
#[no_mangle]
pub unsafe extern "C" fn mpctune_trace_sample(
    trace: *const MpctuneTrace,
    i: usize,
    point: *mut f64,
    d: usize,
    value: *mut f64,
    best_so_far: *mut f64,
) -> MpctuneStatus {
    guard(|| {
        let t = &href(trace, "trace")?.0;
        let s = t
            .samples
            .get(i)
            .ok_or_else(|| Failure(MpctuneStatus::Domain, format!("sample {i} of {}", t.samples.len())))?;
        if !point.is_null() {
            if d != s.point.len() {
                return Err(Error::Dimension(format!("point buffer {d}, trace dimension {}", s.point.len())).into());
            }
            std::ptr::copy_nonoverlapping(s.point.as_ptr(), point, d);
        }
        if !value.is_null() {
            value.write(s.value);
        }
        if !best_so_far.is_null() {
            best_so_far.write(s.best_so_far);
        }
        Ok(())
    })
}

/// Best sample of the trace.
#[no_mangle]
pub unsafe extern "C" fn mpctune_trace_best(
    trace: *const MpctuneTrace,
    point: *mut f64,
    d: usize,
    value: *mut f64,
) -> MpctuneStatus {
    guard(|| {
        let t = &href(trace, "trace")?.0;
        let i = t
            .samples
            .iter()
            .position(|s| t.best().is_some_and(|b| std::ptr::eq(s, b)))
            .ok_or_else(|| Failure(MpctuneStatus::Domain, "empty trace".into()))?;
        match mpctune_trace_sample(trace, i, point, d, value, std::ptr::null_mut()) {
            MpctuneStatus::Ok => Ok(()),
            status => Err(Failure(status, "copy failed".into())),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_trace_write_json(trace: *const MpctuneTrace, path: *const c_char) -> MpctuneStatus {
    guard(|| {
        let t = &href(trace, "trace")?.0;
        Ok(t.write_json(std::path::Path::new(&string(path, "path")?))?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_trace_write_csv(trace: *const MpctuneTrace, path: *const c_char) -> MpctuneStatus {
    guard(|| {
        let t = &href(trace, "trace")?.0;
        Ok(t.write_csv(std::path::Path::new(&string(path, "path")?))?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mpctune_trace_free(trace: *mut MpctuneTrace) {
    drop_handle(trace)
}
