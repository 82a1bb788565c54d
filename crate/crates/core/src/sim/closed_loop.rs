//! Receding-horizon closed-loop simulation.

use super::backoff::{apply_backoff_update, BackoffCase};
use super::series::{DisturbanceSeries, ForecastGenerator, HourDisturbance};
use crate::error::{Error, Result};
use crate::lp::{BuiltinSimplex, LpBackend, LpProblem, LpStatus};
use crate::plant::{
    build_mpc_lp, extract_first_action, BackoffTerms, ControlAction, DemandWeighting, PlantConfig,
    PlantState, Unit,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const HOURS_PER_WEEK: usize = 168;

/// Overflow or dry-up magnitudes below this are rounding, not events.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;

/// Realized outcome of applying one hour's action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantStep {
    /// Proposed storage levels before clamping.
    pub soc_next_cw: f64,
    pub soc_next_hw: f64,
    /// Realized storage discharge.
    pub flow_cw: f64,
    pub flow_hw: f64,
    pub r_e: f64,
    pub r_w: f64,
    pub r_ng: f64,
    pub cost_e: f64,
    pub cost_w: f64,
    pub cost_ng: f64,
}

/// Applies committed production against realized loads. Storage takes up the
/// thermal load error and the electricity purchase takes up the electric one.
pub fn plant_step(
    state: &PlantState,
    action: &ControlAction,
    realized: &HourDisturbance,
    config: &PlantConfig,
) -> PlantStep {
    let a = &config.alpha;
    let p = |u: Unit| action.load(u);
    let flow_cw = realized.load_cw - p(Unit::Cs) - p(Unit::Hrc) - action.s_un_cw + action.s_ov_cw;
    let flow_hw = realized.load_hw - a.h_hrc * p(Unit::Hrc) - p(Unit::Hwg) + p(Unit::Hx)
        - action.s_un_hw
        + action.s_ov_hw;
    let r_e = a.e_cs * p(Unit::Cs)
        + a.e_hrc * p(Unit::Hrc)
        + a.e_hwg * p(Unit::Hwg)
        + a.e_ct * p(Unit::Ct)
        + realized.load_e;
    let r_w = a.w_ct * p(Unit::Ct);
    let r_ng = a.ng_hwg * p(Unit::Hwg);
    PlantStep {
        soc_next_cw: state.soc_cw - flow_cw,
        soc_next_hw: state.soc_hw - flow_hw,
        flow_cw,
        flow_hw,
        r_e,
        r_w,
        r_ng,
        cost_e: realized.price_e * r_e,
        cost_w: config.price_water * r_w,
        cost_ng: config.price_gas * r_ng,
    }
}

/// Moves solver round-off just outside `[0, capacity]` onto the limit so it
/// is not booked as an overflow or dry-up.
fn snap(soc: f64, capacity: f64) -> f64 {
    if (-VIOLATION_THRESHOLD..0.0).contains(&soc) {
        0.0
    } else if soc > capacity && soc <= capacity + VIOLATION_THRESHOLD {
        capacity
    } else {
        soc
    }
}

/// Billing months repeating over the configured month lengths.
#[derive(Debug, Clone)]
pub struct Calendar {
    month_hours: Vec<usize>,
    cycle: usize,
}

impl Calendar {
    pub fn new(month_hours: &[usize]) -> Result<Self> {
        if month_hours.is_empty() || month_hours.contains(&0) {
            return Err(Error::Config("month lengths must be positive".into()));
        }
        Ok(Calendar { month_hours: month_hours.to_vec(), cycle: month_hours.iter().sum() })
    }

    /// Hours left in the billing month, counting hour `t` itself.
    pub fn hours_remaining(&self, t: usize) -> usize {
        let mut h = t % self.cycle;
        for &len in &self.month_hours {
            if h < len {
                return len - h;
            }
            h -= len;
        }
        unreachable!()
    }

    pub fn is_month_end(&self, t: usize) -> bool {
        self.hours_remaining(t) == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub electricity: f64,
    pub demand: f64,
    pub water: f64,
    pub gas: f64,
    pub slack_penalty: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.electricity + self.demand + self.water + self.gas + self.slack_penalty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tank {
    #[serde(rename = "cw")]
    ChilledWater,
    #[serde(rename = "hw")]
    HotWater,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    #[serde(rename = "overflow")]
    Overflow,
    #[serde(rename = "dry_up")]
    DryUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub hour: usize,
    pub tank: Tank,
    pub kind: ViolationKind,
    /// kWh clamped away.
    pub magnitude: f64,
}

/// One simulated hour. Storage values are after the update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourRecord {
    pub hour: usize,
    pub soc_cw: f64,
    pub soc_hw: f64,
    pub lower_cw: f64,
    pub upper_cw: f64,
    pub lower_hw: f64,
    pub upper_hw: f64,
    pub case_cw: BackoffCase,
    pub case_hw: BackoffCase,
    pub r_e: f64,
    pub r_w: f64,
    pub r_ng: f64,
    pub energy_cost: f64,
    pub demand_charge: f64,
    pub slack_penalty: f64,
    /// Everything charged this hour.
    pub cost: f64,
    pub lp_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopResult {
    pub backoff: BackoffTerms,
    pub hours: usize,
    pub total_cost: f64,
    pub breakdown: CostBreakdown,
    /// Cost per 168-hour week; the last week may be partial.
    pub weekly_cost: Vec<f64>,
    pub trajectory: Vec<HourRecord>,
    pub violations: Vec<Violation>,
    /// Penalty rates used in the closed-loop accounting ($/kWh).
    pub penalty_cw: f64,
    pub penalty_hw: f64,
}

impl ClosedLoopResult {
    /// Writes `result.json`, `trajectory.csv`, `weekly.csv` and
    /// `violations.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("result.json"), serde_json::to_string_pretty(self)? + "\n")?;
        let mut w = csv::Writer::from_path(dir.join("trajectory.csv"))?;
        for r in &self.trajectory {
            w.serialize(r)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("weekly.csv"))?;
        w.write_record(["week", "cost"])?;
        for (i, c) in self.weekly_cost.iter().enumerate() {
            w.write_record([i.to_string(), c.to_string()])?;
        }
        w.flush()?;
        // Header written by hand so an empty log still has one.
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(dir.join("violations.csv"))?;
        w.write_record(["hour", "tank", "kind", "magnitude"])?;
        for v in &self.violations {
            w.serialize(v)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// What the simulation looked like when an MPC solve failed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbortReport {
    pub hour: usize,
    pub reason: String,
    pub backoff: BackoffTerms,
    pub state: PlantState,
    /// The problem that failed, for export via [`crate::lp::write_mps`].
    pub lp: Option<LpProblem>,
}

pub struct SimOptions<'a> {
    pub forecast: ForecastGenerator,
    pub backend: &'a dyn LpBackend,
}

static BUILTIN: BuiltinSimplex = BuiltinSimplex { options: crate::lp::SimplexOptions::DEFAULT };

impl SimOptions<'static> {
    /// Built-in simplex with the forecast noise from `config`.
    pub fn from_config(config: &PlantConfig) -> Self {
        SimOptions {
            forecast: ForecastGenerator::new(config.forecast_noise, config.forecast_seed),
            backend: &BUILTIN,
        }
    }
}

/// Simulates `span_hours` hours with the forecast model from `config`.
pub fn simulate(
    config: &PlantConfig,
    series: &DisturbanceSeries,
    backoff: BackoffTerms,
    span_hours: usize,
) -> Result<ClosedLoopResult> {
    simulate_with(config, series, backoff, span_hours, &SimOptions::from_config(config))
}

pub fn simulate_with(
    config: &PlantConfig,
    series: &DisturbanceSeries,
    backoff: BackoffTerms,
    span_hours: usize,
    options: &SimOptions,
) -> Result<ClosedLoopResult> {
    config.validate()?;
    series.validate()?;
    let backoff = BackoffTerms::new(backoff.cw, backoff.hw)?;
    if span_hours == 0 {
        return Err(Error::Config("span must be at least one hour".into()));
    }
    let needed = span_hours + config.horizon - 1;
    if series.len() < needed {
        return Err(Error::Config(format!(
            "series has {} hours; a {span_hours}-hour span with horizon {} needs {needed}",
            series.len(),
            config.horizon
        )));
    }
    let calendar = Calendar::new(&config.month_hours)?;
    let max_price = series.price_e[..needed].iter().fold(0.0f64, |m, p| m.max(*p));
    let (rho_cw, rho_hw) = config.penalties(max_price);

    let mut state = PlantState::initial(config, backoff);
    let mut breakdown = CostBreakdown::default();
    let mut trajectory = Vec::with_capacity(span_hours);
    let mut violations = Vec::new();
    let mut weekly_cost = vec![0.0; span_hours.div_ceil(HOURS_PER_WEEK)];

    for t in 0..span_hours {
        let abort = |reason: String, state: &PlantState, lp: Option<LpProblem>| {
            Error::Aborted(Box::new(AbortReport { hour: t, reason, backoff, state: state.clone(), lp }))
        };
        let window = options.forecast.window(series, t, config.horizon)?;
        let divisor = match config.demand_weighting {
            DemandWeighting::HoursRemaining => calendar.hours_remaining(t) as f64,
            DemandWeighting::Constant(c) => c,
        };
        let lp = build_mpc_lp(config, &state, &window, backoff, divisor)?;
        let solution = match options.backend.solve(&lp) {
            Ok(s) if s.status == LpStatus::Optimal => s,
            Ok(s) => return Err(abort(format!("MPC problem {:?}", s.status), &state, Some(lp))),
            Err(e) => return Err(abort(e.to_string(), &state, Some(lp))),
        };
        let action = extract_first_action(&lp, &solution)?;
        let realized = series.hour(t);
        let step = plant_step(&state, &action, &realized, config);
        if !(step.soc_next_cw.is_finite() && step.soc_next_hw.is_finite() && step.r_e.is_finite()) {
            return Err(abort("non-finite plant state".into(), &state, Some(lp)));
        }

        state.ul_cw += action.s_un_cw;
        state.ol_cw += action.s_ov_cw;
        state.ul_hw += action.s_un_hw;
        state.ol_hw += action.s_ov_hw;
        let upd = apply_backoff_update(
            &mut state,
            snap(step.soc_next_cw, config.capacity_cw),
            snap(step.soc_next_hw, config.capacity_hw),
            backoff,
            config,
        );
        for (tank, u) in [(Tank::ChilledWater, &upd.cw), (Tank::HotWater, &upd.hw)] {
            for (kind, m) in [(ViolationKind::Overflow, u.overflow), (ViolationKind::DryUp, u.deficit)] {
                if m > VIOLATION_THRESHOLD {
                    violations.push(Violation { hour: t, tank, kind, magnitude: m });
                }
            }
        }

        let slack_penalty = rho_cw
            * (action.s_un_cw + action.s_ov_cw + upd.cw.overflow + upd.cw.deficit)
            + rho_hw * (action.s_un_hw + action.s_ov_hw + upd.hw.overflow + upd.hw.deficit);
        breakdown.electricity += step.cost_e;
        breakdown.water += step.cost_w;
        breakdown.gas += step.cost_ng;
        breakdown.slack_penalty += slack_penalty;

        // The demand charge bills the realized monthly peak at month end;
        // a month cut off by the end of the span is billed at that point.
        state.peak = state.peak.max(step.r_e);
        let month_end = calendar.is_month_end(t);
        let demand_charge = if month_end || t + 1 == span_hours {
            config.price_demand * state.peak
        } else {
            0.0
        };
        breakdown.demand += demand_charge;
        if month_end {
            state.peak = 0.0;
        }
        state.hour = t + 1;

        let energy_cost = step.cost_e + step.cost_w + step.cost_ng;
        let cost = energy_cost + demand_charge + slack_penalty;
        weekly_cost[t / HOURS_PER_WEEK] += cost;
        trajectory.push(HourRecord {
            hour: t,
            soc_cw: state.soc_cw,
            soc_hw: state.soc_hw,
            lower_cw: state.bounds_cw.lower,
            upper_cw: state.bounds_cw.upper,
            lower_hw: state.bounds_hw.lower,
            upper_hw: state.bounds_hw.upper,
            case_cw: upd.cw.case,
            case_hw: upd.hw.case,
            r_e: step.r_e,
            r_w: step.r_w,
            r_ng: step.r_ng,
            energy_cost,
            demand_charge,
            slack_penalty,
            cost,
            lp_iterations: solution.iterations,
        });
    }

    Ok(ClosedLoopResult {
        backoff,
        hours: span_hours,
        total_cost: breakdown.total(),
        breakdown,
        weekly_cost,
        trajectory,
        violations,
        penalty_cw: rho_cw,
        penalty_hw: rho_hw,
    })
}
