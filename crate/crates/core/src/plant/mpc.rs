//! Hourly economic MPC of the central plant as a linear program.
//!
//! Variables are laid out in per-hour blocks of [`VARS_PER_HOUR`] followed by
//! the single peak-demand variable `R`. Within a block, storage and carryover
//! entries are the values at the *end* of that hour.

use super::config::{PlantConfig, Unit};
use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpSolution, LpStatus};
use serde::{Deserialize, Serialize};

pub const VARS_PER_HOUR: usize = 20;

/// Offsets of the variables within one hourly block.
pub mod slot {
    pub const P_CS: usize = 0;
    pub const P_HRC: usize = 1;
    pub const P_HWG: usize = 2;
    pub const P_CT: usize = 3;
    pub const P_HX: usize = 4;
    pub const P_CW: usize = 5;
    pub const P_HW: usize = 6;
    pub const R_E: usize = 7;
    pub const R_W: usize = 8;
    pub const R_NG: usize = 9;
    pub const S_UN_CW: usize = 10;
    pub const S_OV_CW: usize = 11;
    pub const S_UN_HW: usize = 12;
    pub const S_OV_HW: usize = 13;
    pub const E_CW: usize = 14;
    pub const E_HW: usize = 15;
    pub const UL_CW: usize = 16;
    pub const UL_HW: usize = 17;
    pub const OL_CW: usize = 18;
    pub const OL_HW: usize = 19;

    pub const NAMES: [&str; super::VARS_PER_HOUR] = [
        "P_cs", "P_hrc", "P_hwg", "P_ct", "P_hx", "P_cw", "P_hw", "r_e", "r_w", "r_ng", "Sun_cw",
        "Sov_cw", "Sun_hw", "Sov_hw", "E_cw", "E_hw", "ul_cw", "ul_hw", "ol_cw", "ol_hw",
    ];
}

/// Number of LP variables for a horizon of `t` hours.
pub fn lp_size(horizon: usize) -> usize {
    VARS_PER_HOUR * horizon + 1
}

pub fn var(hour: usize, slot: usize) -> usize {
    hour * VARS_PER_HOUR + slot
}

pub fn peak_var(horizon: usize) -> usize {
    VARS_PER_HOUR * horizon
}

/// Forecast disturbances over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastWindow {
    pub load_e: Vec<f64>,
    pub load_cw: Vec<f64>,
    pub load_hw: Vec<f64>,
    pub price_e: Vec<f64>,
}

impl ForecastWindow {
    pub fn len(&self) -> usize {
        self.load_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.load_e.is_empty()
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        for (name, v) in [
            ("electric load", &self.load_e),
            ("chilled water load", &self.load_cw),
            ("hot water load", &self.load_hw),
            ("electricity price", &self.price_e),
        ] {
            if v.len() != horizon {
                return Err(Error::Dimension(format!(
                    "{name} forecast has {} hours, horizon is {horizon}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!("non-finite {name} forecast")));
            }
        }
        if self.load_e.iter().chain(&self.load_cw).chain(&self.load_hw).any(|&x| x < 0.0) {
            return Err(Error::Domain("negative load forecast".into()));
        }
        Ok(())
    }
}

/// Back-off fractions for the chilled and hot water tanks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackoffTerms {
    pub cw: f64,
    pub hw: f64,
}

impl BackoffTerms {
    pub const MAX: f64 = 0.5;

    pub fn new(cw: f64, hw: f64) -> Result<Self> {
        for v in [cw, hw] {
            if !(0.0..=Self::MAX).contains(&v) {
                return Err(Error::Domain(format!("back-off {v} outside [0, 0.5]")));
            }
        }
        Ok(BackoffTerms { cw, hw })
    }

    /// Storage band `[β·Ē, (1-β)·Ē]`.
    pub fn band(beta: f64, capacity: f64) -> (f64, f64) {
        (beta * capacity, (1.0 - beta) * capacity)
    }
}

/// Storage bounds that apply to the first predicted hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TankBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub soc_cw: f64,
    pub soc_hw: f64,
    pub ul_cw: f64,
    pub ul_hw: f64,
    pub ol_cw: f64,
    pub ol_hw: f64,
    /// Peak electrical demand so far in the current billing month (kW).
    pub peak: f64,
    /// Hour index.
    pub hour: usize,
    pub bounds_cw: TankBounds,
    pub bounds_hw: TankBounds,
}

impl PlantState {
    /// Start-of-simulation state: tanks at the configured fraction, bounds set
    /// as if that level had just been observed.
    pub fn initial(config: &PlantConfig, backoff: BackoffTerms) -> Self {
        let soc_cw = config.initial_soc * config.capacity_cw;
        let soc_hw = config.initial_soc * config.capacity_hw;
        let cw = crate::sim::backoff::update_tank(soc_cw, backoff.cw, config.capacity_cw);
        let hw = crate::sim::backoff::update_tank(soc_hw, backoff.hw, config.capacity_hw);
        PlantState {
            soc_cw: cw.soc,
            soc_hw: hw.soc,
            ul_cw: 0.0,
            ul_hw: 0.0,
            ol_cw: 0.0,
            ol_hw: 0.0,
            peak: 0.0,
            hour: 0,
            bounds_cw: cw.bounds,
            bounds_hw: hw.bounds,
        }
    }

    pub fn validate(&self, config: &PlantConfig) -> Result<()> {
        let ok = |v: f64, cap: f64| (0.0..=cap).contains(&v);
        if !ok(self.soc_cw, config.capacity_cw) || !ok(self.soc_hw, config.capacity_hw) {
            return Err(Error::Domain("state of charge outside [0, capacity]".into()));
        }
        if [self.ul_cw, self.ul_hw, self.ol_cw, self.ol_hw, self.peak]
            .iter()
            .any(|v| !(*v >= 0.0))
        {
            return Err(Error::Domain("negative carryover or peak".into()));
        }
        Ok(())
    }
}

/// First-hour decisions of a solved MPC problem.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlAction {
    /// Unit loads indexed by [`Unit::index`] (kW).
    pub loads: [f64; 7],
    pub s_un_cw: f64,
    pub s_ov_cw: f64,
    pub s_un_hw: f64,
    pub s_ov_hw: f64,
}

impl ControlAction {
    pub fn load(&self, unit: Unit) -> f64 {
        self.loads[unit.index()]
    }
}

/// Builds the horizon LP for the current state.
///
/// `demand_divisor` spreads the monthly demand charge over the remaining
/// solves (hours left in the billing month by default).
pub fn build_mpc_lp(
    config: &PlantConfig,
    state: &PlantState,
    forecast: &ForecastWindow,
    backoff: BackoffTerms,
    demand_divisor: f64,
) -> Result<LpProblem> {
    let horizon = config.horizon;
    forecast.validate(horizon)?;
    if !(demand_divisor > 0.0) {
        return Err(Error::Domain(format!("demand divisor must be positive, got {demand_divisor}")));
    }
    state.validate(config)?;
    let max_price = forecast.price_e.iter().fold(0.0f64, |m, p| m.max(*p));
    let (rho_cw, rho_hw) = config.penalties(max_price);
    let band_cw = BackoffTerms::band(backoff.cw, config.capacity_cw);
    let band_hw = BackoffTerms::band(backoff.hw, config.capacity_hw);
    if band_cw.0 > band_cw.1 || band_hw.0 > band_hw.1 {
        return Err(Error::Domain("back-off band is empty".into()));
    }
    let a = &config.alpha;
    let inf = f64::INFINITY;

    let mut p = LpProblem::default();
    let n = lp_size(horizon);
    p.c.reserve(n);
    for k in 0..horizon {
        for (s, name) in slot::NAMES.iter().enumerate() {
            let (lb, ub, cost) = match s {
                slot::P_CS..=slot::P_HW => {
                    let (lo, hi) = config.bounds(Unit::ALL[s]);
                    (lo, hi, 0.0)
                }
                slot::R_E => (-inf, inf, forecast.price_e[k]),
                slot::R_W => (-inf, inf, config.price_water),
                slot::R_NG => (-inf, inf, config.price_gas),
                slot::S_UN_CW..=slot::S_OV_HW => (0.0, inf, 0.0),
                slot::E_CW if k == 0 => (state.bounds_cw.lower, state.bounds_cw.upper, 0.0),
                slot::E_HW if k == 0 => (state.bounds_hw.lower, state.bounds_hw.upper, 0.0),
                slot::E_CW => (band_cw.0, band_cw.1, 0.0),
                slot::E_HW => (band_hw.0, band_hw.1, 0.0),
                slot::UL_CW | slot::OL_CW => (0.0, inf, rho_cw),
                slot::UL_HW | slot::OL_HW => (0.0, inf, rho_hw),
                _ => unreachable!(),
            };
            p.add_var(format!("{name}[{k}]"), lb, ub, cost);
        }
    }
    let peak = p.add_var("R", state.peak, inf, config.price_demand / demand_divisor);
    debug_assert_eq!(p.num_vars(), n);

    for k in 0..horizon {
        let v = |s: usize| var(k, s);
        p.add_eq(
            format!("elec[{k}]"),
            vec![
                (v(slot::R_E), 1.0),
                (v(slot::P_CS), -a.e_cs),
                (v(slot::P_HRC), -a.e_hrc),
                (v(slot::P_HWG), -a.e_hwg),
                (v(slot::P_CT), -a.e_ct),
            ],
            forecast.load_e[k],
        );
        p.add_eq(
            format!("water[{k}]"),
            vec![(v(slot::R_W), 1.0), (v(slot::P_CT), -a.w_ct)],
            0.0,
        );
        p.add_eq(
            format!("gas[{k}]"),
            vec![(v(slot::R_NG), 1.0), (v(slot::P_HWG), -a.ng_hwg)],
            0.0,
        );
        p.add_eq(
            format!("condenser[{k}]"),
            vec![(v(slot::P_CT), 1.0), (v(slot::P_CS), -a.cond_cs), (v(slot::P_HX), -1.0)],
            0.0,
        );
        p.add_eq(
            format!("chilled[{k}]"),
            vec![
                (v(slot::P_CS), 1.0),
                (v(slot::P_HRC), 1.0),
                (v(slot::P_CW), 1.0),
                (v(slot::S_UN_CW), 1.0),
                (v(slot::S_OV_CW), -1.0),
            ],
            forecast.load_cw[k],
        );
        p.add_eq(
            format!("hot[{k}]"),
            vec![
                (v(slot::P_HRC), a.h_hrc),
                (v(slot::P_HWG), 1.0),
                (v(slot::P_HX), -1.0),
                (v(slot::P_HW), 1.0),
                (v(slot::S_UN_HW), 1.0),
                (v(slot::S_OV_HW), -1.0),
            ],
            forecast.load_hw[k],
        );
        // Storage and carryover dynamics, anchored at the current state.
        let dyns = [
            ("soc_cw", slot::E_CW, slot::P_CW, 1.0, state.soc_cw),
            ("soc_hw", slot::E_HW, slot::P_HW, 1.0, state.soc_hw),
            ("ul_cw", slot::UL_CW, slot::S_UN_CW, -1.0, state.ul_cw),
            ("ul_hw", slot::UL_HW, slot::S_UN_HW, -1.0, state.ul_hw),
            ("ol_cw", slot::OL_CW, slot::S_OV_CW, -1.0, state.ol_cw),
            ("ol_hw", slot::OL_HW, slot::S_OV_HW, -1.0, state.ol_hw),
        ];
        for (name, level, flow, sign, init) in dyns {
            let mut row = vec![(v(level), 1.0), (v(flow), sign)];
            let rhs = if k == 0 {
                init
            } else {
                row.push((var(k - 1, level), -1.0));
                0.0
            };
            p.add_eq(format!("{name}[{k}]"), row, rhs);
        }
        p.add_le(format!("peak[{k}]"), vec![(v(slot::R_E), 1.0), (peak, -1.0)], 0.0);
    }
    Ok(p)
}

/// Reads the first-hour block of an optimal MPC solution.
pub fn extract_first_action(problem: &LpProblem, solution: &LpSolution) -> Result<ControlAction> {
    if solution.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("MPC problem is {:?}", solution.status)));
    }
    let get = |s: usize| -> Result<f64> {
        let name = format!("{}[0]", slot::NAMES[s]);
        let j = if problem.var_names.get(s).map(String::as_str) == Some(name.as_str()) {
            s
        } else {
            problem
                .var_index(&name)
                .ok_or_else(|| Error::Dimension(format!("variable {name} not in problem")))?
        };
        solution
            .x
            .get(j)
            .copied()
            .ok_or_else(|| Error::Dimension("solution shorter than problem".into()))
    };
    let mut action = ControlAction::default();
    for (i, s) in (slot::P_CS..=slot::P_HW).enumerate() {
        action.loads[i] = get(s)?;
    }
    action.s_un_cw = get(slot::S_UN_CW)?;
    action.s_ov_cw = get(slot::S_OV_CW)?;
    action.s_un_hw = get(slot::S_UN_HW)?;
    action.s_ov_hw = get(slot::S_OV_HW)?;
    Ok(action)
}
