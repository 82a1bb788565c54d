//! The tuning objective: live closed-loop cost, a bilinear surface over a
//! precomputed cost grid, or an analytic test surface.

use crate::error::{Error, Result};
use crate::plant::{BackoffTerms, PlantConfig};
use crate::sim::{simulate, DisturbanceSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const GRID_FORMAT_VERSION: u32 = 1;

/// Where a grid's numbers came from. Two grids with equal provenance are
/// interchangeable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub series_hash: String,
    pub span_hours: usize,
    pub horizon: usize,
    pub forecast_seed: u64,
}

impl Provenance {
    pub fn of(config: &PlantConfig, series: &DisturbanceSeries, span_hours: usize) -> Self {
        Provenance {
            config_hash: config.hash(),
            series_hash: series.hash(),
            span_hours,
            horizon: config.horizon,
            forecast_seed: config.forecast_seed,
        }
    }
}

/// Closed-loop cost at every combination of `knots_cw` × `knots_hw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostGrid {
    pub version: u32,
    pub knots_cw: Vec<f64>,
    pub knots_hw: Vec<f64>,
    /// Row-major: `costs[i * knots_hw.len() + j]` is the cost at
    /// `(knots_cw[i], knots_hw[j])`. `None` marks a failed simulation.
    pub costs: Vec<Option<f64>>,
    pub provenance: Option<Provenance>,
}

pub fn validate_knots(knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::Config("need at least two knots per dimension".into()));
    }
    if knots.iter().any(|k| !(0.0..=0.5).contains(k)) {
        return Err(Error::Config(format!("knots must lie in [0, 0.5]: {knots:?}")));
    }
    if knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("knots must be strictly increasing: {knots:?}")));
    }
    Ok(())
}

/// `n` evenly spaced knots from 0 to 0.5.
pub fn uniform_knots(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 * i as f64 / (n - 1).max(1) as f64).collect()
}

/// Lowest index `i` with `knots[i] <= x <= knots[i + 1]`.
fn cell(knots: &[f64], x: f64) -> Option<(usize, f64)> {
    let last = knots.len() - 1;
    if !(knots[0] <= x && x <= knots[last]) {
        return None;
    }
    let i = knots.partition_point(|k| *k <= x).saturating_sub(1).min(last - 1);
    Some((i, (x - knots[i]) / (knots[i + 1] - knots[i])))
}

impl CostGrid {
    pub fn new(knots_cw: Vec<f64>, knots_hw: Vec<f64>, costs: Vec<f64>) -> Result<Self> {
        let g = CostGrid {
            version: GRID_FORMAT_VERSION,
            knots_cw,
            knots_hw,
            costs: costs.into_iter().map(Some).collect(),
            provenance: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.knots_cw.len(), self.knots_hw.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != GRID_FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported grid version {}", self.version)));
        }
        validate_knots(&self.knots_cw)?;
        validate_knots(&self.knots_hw)?;
        let (a, b) = self.shape();
        if self.costs.len() != a * b {
            return Err(Error::Dimension(format!("{} costs for a {a}x{b} grid", self.costs.len())));
        }
        if self.costs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite grid cost".into()));
        }
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.costs.iter().all(Option::is_some)
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.costs[i * self.knots_hw.len() + j]
    }

    /// Smallest stored cost and its knot coordinates.
    pub fn min(&self) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for (i, &a) in self.knots_cw.iter().enumerate() {
            for (j, &b) in self.knots_hw.iter().enumerate() {
                if let Some(c) = self.value(i, j) {
                    if best.is_none_or(|(v, _, _)| c < v) {
                        best = Some((c, a, b));
                    }
                }
            }
        }
        best
    }

    /// Bilinear interpolation; exact at knots.
    pub fn interpolate(&self, beta_cw: f64, beta_hw: f64) -> Result<f64> {
        if !self.is_complete() {
            return Err(Error::Objective("grid is incomplete".into()));
        }
        let outside = || Error::Domain(format!("({beta_cw}, {beta_hw}) is outside the grid"));
        let (i, u) = cell(&self.knots_cw, beta_cw).ok_or_else(outside)?;
        let (j, v) = cell(&self.knots_hw, beta_hw).ok_or_else(outside)?;
        let c = |di: usize, dj: usize| self.value(i + di, j + dj).unwrap_or(f64::NAN);
        Ok((1.0 - u) * (1.0 - v) * c(0, 0) + u * (1.0 - v) * c(1, 0) + (1.0 - u) * v * c(0, 1) + u * v * c(1, 1))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let g: CostGrid = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        g.validate()?;
        Ok(g)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Long format, one row per knot pair: `beta_cw,beta_hw,cost` (cost
    /// empty where the simulation failed).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["beta_cw", "beta_hw", "cost"])?;
        for (i, a) in self.knots_cw.iter().enumerate() {
            for (j, b) in self.knots_hw.iter().enumerate() {
                let c = self.value(i, j).map(|c| c.to_string()).unwrap_or_default();
                w.write_record([a.to_string(), b.to_string(), c])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Failed knots of a partial grid.
#[derive(Debug)]
pub struct GridFailure {
    pub grid: CostGrid,
    pub failures: Vec<(f64, f64, Error)>,
}

/// Simulates every knot pair in parallel on the current rayon pool. The
/// result does not depend on evaluation order or thread count.
pub fn grid_evaluate(
    config: &PlantConfig,
    series: &DisturbanceSeries,
    knots_cw: &[f64],
    knots_hw: &[f64],
    span_hours: usize,
) -> std::result::Result<CostGrid, Box<GridFailure>> {
    grid_evaluate_with(knots_cw, knots_hw, Some(Provenance::of(config, series, span_hours)), |a, b| {
        Ok(simulate(config, series, BackoffTerms::new(a, b)?, span_hours)?.total_cost)
    })
}

/// Grid over an arbitrary cost function.
pub fn grid_evaluate_with(
    knots_cw: &[f64],
    knots_hw: &[f64],
    provenance: Option<Provenance>,
    cost: impl Fn(f64, f64) -> Result<f64> + Sync,
) -> std::result::Result<CostGrid, Box<GridFailure>> {
    let empty = || CostGrid {
        version: GRID_FORMAT_VERSION,
        knots_cw: knots_cw.to_vec(),
        knots_hw: knots_hw.to_vec(),
        costs: vec![None; knots_cw.len() * knots_hw.len()],
        provenance: provenance.clone(),
    };
    if let Err(e) = validate_knots(knots_cw).and_then(|_| validate_knots(knots_hw)) {
        return Err(Box::new(GridFailure { grid: empty(), failures: vec![(f64::NAN, f64::NAN, e)] }));
    }
    let pairs: Vec<(f64, f64)> = knots_cw.iter().flat_map(|&a| knots_hw.iter().map(move |&b| (a, b))).collect();
    let results: Vec<Result<f64>> = pairs.par_iter().map(|&(a, b)| cost(a, b)).collect();
    let mut grid = empty();
    let mut failures = Vec::new();
    for (k, (r, (a, b))) in results.into_iter().zip(pairs).enumerate() {
        match r {
            Ok(c) if c.is_finite() => grid.costs[k] = Some(c),
            Ok(c) => failures.push((a, b, Error::Numerical(format!("cost {c}")))),
            Err(e) => failures.push((a, b, e)),
        }
    }
    if failures.is_empty() {
        Ok(grid)
    } else {
        Err(Box::new(GridFailure { grid, failures }))
    }
}

/// Analytic test surfaces over `[0, 0.5]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    /// `1000 + 4000 |ξ - (0.2, 0.3)|²`.
    Quadratic,
    /// Lower envelope of two bowls: a deep one at (0.35, 0.15) with value
    /// 2 and a shallow one at (0.1, 0.4) with value 3.
    TwoMinima,
    /// 1 everywhere.
    Constant,
}

impl Surface {
    pub const ALL: [Surface; 3] = [Surface::Quadratic, Surface::TwoMinima, Surface::Constant];

    pub fn name(self) -> &'static str {
        match self {
            Surface::Quadratic => "quadratic",
            Surface::TwoMinima => "two-minima",
            Surface::Constant => "constant",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Surface::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown surface {name:?}")))
    }

    /// Global minimizer and value.
    pub fn minimum(self) -> ([f64; 2], f64) {
        match self {
            Surface::Quadratic => ([0.2, 0.3], 1000.0),
            Surface::TwoMinima => ([0.35, 0.15], 2.0),
            Surface::Constant => ([0.25, 0.25], 1.0),
        }
    }

    /// Non-global local minimizer and value, where there is one.
    pub fn local_minimum(self) -> Option<([f64; 2], f64)> {
        match self {
            Surface::TwoMinima => Some(([0.1, 0.4], 3.0)),
            _ => None,
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        let sq = |c: [f64; 2]| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
        match self {
            Surface::Quadratic => 1000.0 + 4000.0 * sq([0.2, 0.3]),
            Surface::TwoMinima => (2.0 + 40.0 * sq([0.35, 0.15])).min(3.0 + 40.0 * sq([0.1, 0.4])),
            Surface::Constant => 1.0,
        }
    }
}

pub fn synthetic_surface(name: &str, x: &[f64]) -> Result<f64> {
    if x.len() != 2 {
        return Err(Error::Dimension(format!("surfaces are 2-D, got {} coordinates", x.len())));
    }
    Ok(Surface::from_name(name)?.eval(x))
}

/// Checks that a stored grid was built from the active inputs.
pub fn check_provenance(grid: &CostGrid, expected: &Provenance) -> Result<()> {
    match &grid.provenance {
        Some(p) if p == expected => Ok(()),
        Some(p) => Err(Error::Config(format!(
            "grid was built from different inputs (config {}, series {}, span {}); expected config {}, series {}, span {}",
            p.config_hash, p.series_hash, p.span_hours, expected.config_hash, expected.series_hash, expected.span_hours
        ))),
        None => Err(Error::Config("grid carries no provenance".into())),
    }
}
