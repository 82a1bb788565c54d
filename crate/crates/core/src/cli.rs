//! Command-line front end. Every experiment command writes its outputs and a
//! `manifest.json` into `--out`.

use crate::bo::{self, BoConfig, BoTrace, Bounds};
use crate::error::{Error, Result};
use crate::objective::{self, CostGrid, Provenance, Surface};
use crate::plant::{BackoffTerms, PlantConfig};
use crate::sim::{self, campus_fixture, zero_fixture, DisturbanceSeries};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

/// Seed of the built-in campus series used when `--series` is absent.
pub const FIXTURE_SEED: u64 = 1;
/// Four weeks.
pub const DEFAULT_SPAN_HOURS: usize = 672;
/// Side of the posterior snapshot lattice.
pub const SNAPSHOT_SIDE: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "mpctune", version, about = "Back-off tuning for a thermal-storage plant MPC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-loop simulation at one back-off pair.
    Simulate {
        #[command(flatten)]
        plant: PlantArgs,
        /// Back-off fractions `cw,hw`.
        #[arg(long, default_value = "0.1,0.1")]
        beta: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-loop cost on a grid of back-off pairs.
    Grid {
        #[command(flatten)]
        plant: PlantArgs,
        /// Knots `cw-list;hw-list`, e.g. `0,0.25,0.5;0,0.25,0.5`. Default: 9 evenly spaced on [0, 0.5].
        #[arg(long)]
        knots: Option<String>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        parallel: usize,
        /// Recompute even if a matching grid is already in `--out`.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bayesian optimization of the back-off pair.
    Tune {
        #[command(flatten)]
        plant: PlantArgs,
        /// `live`, `grid:<file>` or `synthetic:<quadratic|two-minima|constant>`.
        #[arg(long, default_value = "live")]
        objective: String,
        /// BO run configuration file; flags below override it.
        #[arg(long)]
        bo_config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        init: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Explicit initial points `a,b;c,d;...` instead of a Latin hypercube.
        #[arg(long)]
        init_points: Option<String>,
        /// Accept a grid built from different inputs.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes a synthetic disturbance series.
    Fixture {
        #[arg(long, default_value_t = DEFAULT_SPAN_HOURS + 47)]
        hours: usize,
        #[arg(long, default_value_t = FIXTURE_SEED)]
        seed: u64,
        /// All-zero loads and prices.
        #[arg(long)]
        zero: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prints the default plant (or BO) configuration file.
    DefaultConfig {
        #[arg(long)]
        bo: bool,
    },
}

#[derive(Debug, Args)]
pub struct PlantArgs {
    /// Plant configuration file. Default: built-in desk-scale plant.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Disturbance series CSV. Default: built-in campus series.
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SPAN_HOURS)]
    pub span_hours: usize,
}

struct Inputs {
    config: PlantConfig,
    config_path: Option<PathBuf>,
    series: DisturbanceSeries,
    series_source: String,
    span_hours: usize,
}

impl PlantArgs {
    fn load(&self) -> Result<Inputs> {
        let config = match &self.config {
            Some(p) => PlantConfig::from_file(p)?,
            None => PlantConfig::default(),
        };
        let needed = self.span_hours + config.horizon.max(1) - 1;
        let (series, series_source) = match &self.series {
            Some(p) => (DisturbanceSeries::read_csv(p)?, p.display().to_string()),
            None => (campus_fixture(needed, FIXTURE_SEED), format!("builtin:campus:seed={FIXTURE_SEED}:hours={needed}")),
        };
        Ok(Inputs { config, config_path: self.config.clone(), series, series_source, span_hours: self.span_hours })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config_path: Option<String>,
    pub config_hash: String,
    /// Resolved configuration in the file format.
    pub config_text: String,
    pub series: String,
    pub series_hash: String,
    pub span_hours: usize,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    pub out_dir: String,
    /// SHA-256 of each module's source.
    pub module_hashes: BTreeMap<String, String>,
    /// Closed-loop simulations actually run.
    pub simulations: usize,
    /// The command reused cached results.
    pub skipped: bool,
    pub status: String,
    pub outputs: Vec<String>,
}

const MODULE_SOURCES: &[(&str, &str)] = &[
    ("bo", include_str!("bo.rs")),
    ("cli", include_str!("cli.rs")),
    ("gp", include_str!("gp.rs")),
    ("lp", include_str!("lp/mod.rs")),
    ("lp::mps", include_str!("lp/mps.rs")),
    ("lp::simplex", include_str!("lp/simplex.rs")),
    ("objective", include_str!("objective.rs")),
    ("plant::config", include_str!("plant/config.rs")),
    ("plant::mpc", include_str!("plant/mpc.rs")),
    ("sim::backoff", include_str!("sim/backoff.rs")),
    ("sim::closed_loop", include_str!("sim/closed_loop.rs")),
    ("sim::series", include_str!("sim/series.rs")),
];

pub fn module_hashes() -> BTreeMap<String, String> {
    MODULE_SOURCES
        .iter()
        .map(|(name, src)| (name.to_string(), hex::encode(Sha256::digest(src.as_bytes()))))
        .collect()
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

struct Run {
    manifest: RunManifest,
    out: PathBuf,
}

impl Run {
    fn start(command: &str, argv: &[String], inputs: &Inputs, out: &Path, seed: Option<u64>) -> Result<Self> {
        std::fs::create_dir_all(out)?;
        Ok(Run {
            manifest: RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                argv: argv.to_vec(),
                config_path: inputs.config_path.as_ref().map(|p| p.display().to_string()),
                config_hash: inputs.config.hash(),
                config_text: inputs.config.to_text(),
                series: inputs.series_source.clone(),
                series_hash: inputs.series.hash(),
                span_hours: inputs.span_hours,
                seed,
                started: now(),
                finished: String::new(),
                out_dir: out.display().to_string(),
                module_hashes: module_hashes(),
                simulations: 0,
                skipped: false,
                status: "running".into(),
                outputs: Vec::new(),
            },
            out: out.to_path_buf(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn finish(mut self, status: &str) -> Result<()> {
        self.manifest.status = status.to_string();
        self.manifest.finished = now();
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        std::fs::write(self.out.join("manifest.json"), text)?;
        Ok(())
    }
}

pub fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Vec<f64> = parts.iter().filter_map(|p| p.parse::<f64>().ok()).collect();
    match nums[..] {
        [a, b] if parts.len() == 2 => Ok((a, b)),
        _ => Err(Error::Config(format!("expected `a,b`, found `{s}`"))),
    }
}

/// `0,0.25,0.5;0,0.5` → two knot vectors, validated.
pub fn parse_knots(s: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let list = |t: &str| -> Result<Vec<f64>> {
        t.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad knot `{v}` in `{s}`"))))
            .collect()
    };
    let Some((a, b)) = s.split_once(';') else {
        return Err(Error::Config(format!("knots need two `;`-separated lists, found `{s}`")));
    };
    let (a, b) = (list(a)?, list(b)?);
    objective::validate_knots(&a)?;
    objective::validate_knots(&b)?;
    Ok((a, b))
}

pub fn parse_points(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').map(|p| parse_pair(p).map(|(a, b)| vec![a, b])).collect()
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::Solver(_) | Error::Aborted(_) => EXIT_NUMERICAL,
        Error::Tuning { .. } => EXIT_PARTIAL,
        _ => EXIT_CONFIG,
    }
}

/// Runs the command line; returns the process exit code. Diagnostics go to
/// stderr.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, argv: &[String]) -> Result<i32> {
    match command {
        Command::Simulate { plant, beta, out } => cmd_simulate(&plant.load()?, &beta, &out, argv),
        Command::Grid { plant, knots, parallel, force, out } => {
            let knots = match knots {
                Some(k) => parse_knots(&k)?,
                None => (objective::uniform_knots(9), objective::uniform_knots(9)),
            };
            cmd_grid(&plant.load()?, knots, parallel, force, &out, argv)
        }
        Command::Tune { plant, objective, bo_config, seed, kappa, init, iters, restarts, init_points, force, out } => {
            let mut cfg = match bo_config {
                Some(p) => BoConfig::parse(&std::fs::read_to_string(&p)?, &p.display().to_string())?,
                None => BoConfig::default(),
            };
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.kappa = kappa.unwrap_or(cfg.kappa);
            cfg.n_init = init.unwrap_or(cfg.n_init);
            cfg.max_iter = iters.unwrap_or(cfg.max_iter);
            cfg.restarts = restarts.unwrap_or(cfg.restarts);
            if let Some(p) = init_points {
                cfg.initial_points = Some(parse_points(&p)?);
            }
            cfg.validate()?;
            cmd_tune(&plant.load()?, &objective, &cfg, force, &out, argv)
        }
        Command::Fixture { hours, seed, zero, out } => {
            let series = if zero { zero_fixture(hours) } else { campus_fixture(hours, seed) };
            series.write_csv(&out)?;
            Ok(EXIT_OK)
        }
        Command::DefaultConfig { bo } => {
            if bo {
                print!("{}", BoConfig::default().to_text());
            } else {
                print!("{}", PlantConfig::default().to_text());
            }
            Ok(EXIT_OK)
        }
    }
}

fn cmd_simulate(inputs: &Inputs, beta: &str, out: &Path, argv: &[String]) -> Result<i32> {
    let (cw, hw) = parse_pair(beta)?;
    let backoff = BackoffTerms::new(cw, hw)?;
    let mut run = Run::start("simulate", argv, inputs, out, Some(inputs.config.forecast_seed))?;
    run.manifest.simulations = 1;
    match sim::simulate(&inputs.config, &inputs.series, backoff, inputs.span_hours) {
        Ok(result) => {
            result.write_outputs(out)?;
            for name in ["result.json", "trajectory.csv", "weekly.csv", "violations.csv"] {
                run.path(name);
            }
            eprintln!("total cost {:.2} over {} h, {} violations", result.total_cost, result.hours, result.violations.len());
            run.finish("ok")?;
            Ok(EXIT_OK)
        }
        Err(Error::Aborted(report)) => {
            std::fs::write(run.path("abort.json"), serde_json::to_string_pretty(&report)? + "\n")?;
            if let Some(lp) = &report.lp {
                let mut f = std::fs::File::create(run.path("failed_lp.mps"))?;
                crate::lp::write_mps(lp, &format!("MPC{}", report.hour), &mut f)?;
            }
            run.finish("failed")?;
            Err(Error::Aborted(report))
        }
        Err(e) => Err(e),
    }
}

fn cmd_grid(
    inputs: &Inputs,
    (knots_cw, knots_hw): (Vec<f64>, Vec<f64>),
    parallel: usize,
    force: bool,
    out: &Path,
    argv: &[String],
) -> Result<i32> {
    let provenance = Provenance::of(&inputs.config, &inputs.series, inputs.span_hours);
    let cached = out.join("grid.json");
    let mut run = Run::start("grid", argv, inputs, out, Some(inputs.config.forecast_seed))?;
    if cached.exists() && !force {
        let grid = CostGrid::read(&cached)?;
        let same = grid.knots_cw == knots_cw && grid.knots_hw == knots_hw && grid.is_complete();
        if same && objective::check_provenance(&grid, &provenance).is_ok() {
            eprintln!("grid.json matches the inputs; skipping (use --force to recompute)");
            run.manifest.skipped = true;
            run.path("grid.json");
            run.finish("ok")?;
            return Ok(EXIT_OK);
        }
        return Err(Error::Config(format!(
            "{} holds a grid for different inputs; use --force to overwrite",
            cached.display()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    run.manifest.simulations = knots_cw.len() * knots_hw.len();
    let result = pool.install(|| {
        objective::grid_evaluate(&inputs.config, &inputs.series, &knots_cw, &knots_hw, inputs.span_hours)
    });
    match result {
        Ok(grid) => {
            grid.write(&run.path("grid.json"))?;
            grid.write_csv(&run.path("grid.csv"))?;
            run.finish("ok")?;
            Ok(EXIT_OK)
        }
        Err(failure) => {
            for (a, b, e) in &failure.failures {
                eprintln!("knot ({a}, {b}) failed: {e}");
            }
            let _ = std::fs::remove_file(&cached);
            failure.grid.write(&run.path("grid.partial.json"))?;
            failure.grid.write_csv(&run.path("grid.partial.csv"))?;
            run.finish("partial")?;
            Ok(EXIT_PARTIAL)
        }
    }
}

enum Objective {
    Live,
    Grid(CostGrid),
    Synthetic(Surface),
}

fn cmd_tune(inputs: &Inputs, selector: &str, cfg: &BoConfig, force: bool, out: &Path, argv: &[String]) -> Result<i32> {
    let objective = if selector == "live" {
        Objective::Live
    } else if let Some(path) = selector.strip_prefix("grid:") {
        let grid = CostGrid::read(Path::new(path))?;
        let expected = Provenance::of(&inputs.config, &inputs.series, inputs.span_hours);
        if let Err(e) = objective::check_provenance(&grid, &expected) {
            if !force {
                return Err(Error::Config(format!("{e}; use --force to accept it")));
            }
            eprintln!("warning: {e}");
        }
        if !grid.is_complete() {
            return Err(Error::Config(format!("{path} is a partial grid")));
        }
        Objective::Grid(grid)
    } else if let Some(name) = selector.strip_prefix("synthetic:") {
        Objective::Synthetic(Surface::from_name(name)?)
    } else {
        return Err(Error::Config(format!("unknown objective `{selector}`")));
    };
    let bounds = match &objective {
        Objective::Grid(g) => Bounds::named(
            vec![g.knots_cw[0], g.knots_hw[0]],
            vec![*g.knots_cw.last().unwrap(), *g.knots_hw.last().unwrap()],
            vec!["beta_cw".into(), "beta_hw".into()],
        )?,
        _ => Bounds::named(vec![0.0, 0.0], vec![0.5, 0.5], vec!["beta_cw".into(), "beta_hw".into()])?,
    };

    let mut run = Run::start("tune", argv, inputs, out, Some(cfg.seed))?;
    std::fs::write(run.path("bo_config.txt"), cfg.to_text())?;
    let simulations = AtomicUsize::new(0);
    let mut f = |x: &[f64]| -> Result<f64> {
        match &objective {
            Objective::Live => {
                simulations.fetch_add(1, Ordering::Relaxed);
                let b = BackoffTerms::new(x[0], x[1])?;
                Ok(sim::simulate(&inputs.config, &inputs.series, b, inputs.span_hours)?.total_cost)
            }
            Objective::Grid(g) => g.interpolate(x[0], x[1]),
            Objective::Synthetic(s) => Ok(s.eval(x)),
        }
    };

    let snapshot_path = run.path("snapshots.csv");
    let mut snapshots = csv::Writer::from_path(&snapshot_path)?;
    snapshots.write_record(["iteration", "beta_cw", "beta_hw", "mean", "sd"])?;
    let mut snapshot_error = None;
    let mut observer = |model: &crate::gp::GpModel, it: usize, _next: &[f64]| {
        let rows = match bo::posterior_grid(model, &bounds, SNAPSHOT_SIDE) {
            Ok(r) => r,
            Err(e) => {
                snapshot_error.get_or_insert(e);
                return;
            }
        };
        for r in rows {
            let rec = [it.to_string(), r[0].to_string(), r[1].to_string(), r[2].to_string(), r[3].to_string()];
            if let Err(e) = snapshots.write_record(&rec) {
                snapshot_error.get_or_insert(e.into());
            }
        }
    };
    let result = bo::run_bo_observed(&mut f, &bounds, cfg, &mut observer);
    snapshots.flush()?;
    drop(snapshots);
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    run.manifest.simulations = simulations.load(Ordering::Relaxed);

    let write_trace = |run: &mut Run, trace: &BoTrace| -> Result<()> {
        trace.write_json(&run.path("trace.json"))?;
        trace.write_csv(&run.path("trace.csv"))
    };
    match result {
        Ok(trace) => {
            write_trace(&mut run, &trace)?;
            if let Some(best) = trace.best() {
                eprintln!("best {:.6} at ({:.4}, {:.4}) after {} evaluations", best.value, best.point[0], best.point[1], trace.samples.len());
            }
            run.finish("ok")?;
            Ok(EXIT_OK)
        }
        Err(Error::Tuning { reason, trace }) => {
            eprintln!("error: tuning stopped: {reason}");
            write_trace(&mut run, &trace)?;
            run.finish("partial")?;
            Ok(EXIT_PARTIAL)
        }
        Err(e) => Err(e),
    }
}
