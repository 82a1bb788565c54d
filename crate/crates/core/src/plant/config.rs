//! Plant configuration and its text file format.
//!
//! The file is a flat list of `key = value` lines; `#` starts a comment.
//! Pairs such as unit bounds are written `min, max`. Every key is optional and
//! falls back to the synthetic desk-scale plant returned by
//! [`PlantConfig::default`]. Unknown keys, duplicates and malformed values are
//! rejected with the offending line number.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::Path;

/// Plant units with bounded hourly loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    /// Chiller subplant.
    Cs,
    /// Heat-recovery chiller subplant.
    Hrc,
    /// Hot water generator.
    Hwg,
    /// Cooling towers.
    Ct,
    /// Dump heat exchanger.
    Hx,
    /// Chilled water storage discharge.
    Cw,
    /// Hot water storage discharge.
    Hw,
}

impl Unit {
    pub const ALL: [Unit; 7] = [Unit::Cs, Unit::Hrc, Unit::Hwg, Unit::Ct, Unit::Hx, Unit::Cw, Unit::Hw];

    pub fn key(self) -> &'static str {
        match self {
            Unit::Cs => "cs",
            Unit::Hrc => "hrc",
            Unit::Hwg => "hwg",
            Unit::Ct => "ct",
            Unit::Hx => "hx",
            Unit::Cw => "cw",
            Unit::Hw => "hw",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Conversion coefficients (kW per kW, water in gal per kWh).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conversion {
    pub e_cs: f64,
    pub e_hrc: f64,
    pub e_hwg: f64,
    pub ng_hwg: f64,
    pub e_ct: f64,
    pub w_ct: f64,
    pub h_hrc: f64,
    pub cond_cs: f64,
}

/// How the monthly demand charge is spread over the hourly solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DemandWeighting {
    /// Divide by the hours left in the current billing month.
    HoursRemaining,
    /// Divide by a fixed number.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub alpha: Conversion,
    /// `[min, max]` hourly load per unit, indexed by [`Unit::index`] (kW).
    pub unit_bounds: [[f64; 2]; 7],
    /// Chilled / hot water storage capacity (kWh).
    pub capacity_cw: f64,
    pub capacity_hw: f64,
    /// Initial state of charge as a fraction of capacity.
    pub initial_soc: f64,
    /// $/gal.
    pub price_water: f64,
    /// $/kWh.
    pub price_gas: f64,
    /// $/kW of monthly peak.
    pub price_demand: f64,
    /// $/kWh penalties on carried under/over-production; `None` means ten
    /// times the largest electricity price in the disturbance series.
    pub penalty_cw: Option<f64>,
    pub penalty_hw: Option<f64>,
    /// Prediction horizon (hours).
    pub horizon: usize,
    pub demand_weighting: DemandWeighting,
    /// Billing month lengths in hours, cycled.
    pub month_hours: Vec<usize>,
    /// Relative std of the multiplicative load forecast error.
    pub forecast_noise: f64,
    pub forecast_seed: u64,
}

impl Default for PlantConfig {
    /// Synthetic desk-scale plant: ~1 MW chilled, ~0.5 MW hot water, storage
    /// sized for two to three hours of mean load.
    fn default() -> Self {
        PlantConfig {
            alpha: Conversion {
                e_cs: 0.20,
                e_hrc: 0.30,
                e_hwg: 0.01,
                ng_hwg: 1.15,
                e_ct: 0.02,
                w_ct: 0.40,
                h_hrc: 1.30,
                cond_cs: 1.20,
            },
            unit_bounds: [
                [0.0, 1400.0],
                [0.0, 350.0],
                [0.0, 900.0],
                [0.0, 3000.0],
                [0.0, 900.0],
                [-3000.0, 3000.0],
                [-1500.0, 1500.0],
            ],
            capacity_cw: 2500.0,
            capacity_hw: 1200.0,
            initial_soc: 0.5,
            price_water: 0.009,
            price_gas: 0.018,
            price_demand: 4.5,
            penalty_cw: None,
            penalty_hw: None,
            horizon: 48,
            demand_weighting: DemandWeighting::HoursRemaining,
            month_hours: vec![744, 672, 744, 720, 744, 720, 744, 744, 720, 744, 720, 744],
            forecast_noise: 0.10,
            forecast_seed: 7,
        }
    }
}

const KEYS: &[&str] = &[
    "alpha.e_cs",
    "alpha.e_hrc",
    "alpha.e_hwg",
    "alpha.ng_hwg",
    "alpha.e_ct",
    "alpha.w_ct",
    "alpha.h_hrc",
    "alpha.cond_cs",
    "unit.cs",
    "unit.hrc",
    "unit.hwg",
    "unit.ct",
    "unit.hx",
    "unit.cw",
    "unit.hw",
    "storage.cw_capacity",
    "storage.hw_capacity",
    "storage.initial_soc",
    "price.water",
    "price.gas",
    "price.demand",
    "penalty.cw",
    "penalty.hw",
    "mpc.horizon",
    "mpc.demand_weighting",
    "calendar.month_hours",
    "forecast.noise",
    "forecast.seed",
];

struct Entry {
    line: usize,
    value: String,
}

impl PlantConfig {
    pub fn penalties(&self, max_price: f64) -> (f64, f64) {
        let fallback = 10.0 * max_price;
        (
            self.penalty_cw.unwrap_or(fallback),
            self.penalty_hw.unwrap_or(fallback),
        )
    }

    pub fn bounds(&self, unit: Unit) -> (f64, f64) {
        let [lo, hi] = self.unit_bounds[unit.index()];
        (lo, hi)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses a config file's text. `origin` names it in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::ConfigLine {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut entries: HashMap<&str, Entry> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(err(line, format!("expected `key = value`, found `{content}`")));
            };
            let k = k.trim();
            let Some(key) = KEYS.iter().find(|known| **known == k) else {
                return Err(err(line, format!("unknown key `{k}`")));
            };
            if let Some(prev) = entries.get(key) {
                return Err(err(line, format!("duplicate key `{k}` (first set on line {})", prev.line)));
            }
            entries.insert(
                key,
                Entry {
                    line,
                    value: v.trim().to_string(),
                },
            );
        }

        let mut cfg = PlantConfig::default();
        let num = |key: &str, e: &Entry| -> Result<f64> {
            e.value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(e.line, format!("`{key}` expects a finite number, found `{}`", e.value)))
        };
        let int = |key: &str, e: &Entry| -> Result<u64> {
            e.value
                .parse::<u64>()
                .map_err(|_| err(e.line, format!("`{key}` expects a nonnegative integer, found `{}`", e.value)))
        };
        let mut ordered: Vec<(&str, &Entry)> = entries.iter().map(|(k, e)| (*k, e)).collect();
        ordered.sort_by_key(|(_, e)| e.line);
        for (key, e) in ordered {
            match key {
                "alpha.e_cs" => cfg.alpha.e_cs = num(key, e)?,
                "alpha.e_hrc" => cfg.alpha.e_hrc = num(key, e)?,
                "alpha.e_hwg" => cfg.alpha.e_hwg = num(key, e)?,
                "alpha.ng_hwg" => cfg.alpha.ng_hwg = num(key, e)?,
                "alpha.e_ct" => cfg.alpha.e_ct = num(key, e)?,
                "alpha.w_ct" => cfg.alpha.w_ct = num(key, e)?,
                "alpha.h_hrc" => cfg.alpha.h_hrc = num(key, e)?,
                "alpha.cond_cs" => cfg.alpha.cond_cs = num(key, e)?,
                "storage.cw_capacity" => cfg.capacity_cw = num(key, e)?,
                "storage.hw_capacity" => cfg.capacity_hw = num(key, e)?,
                "storage.initial_soc" => cfg.initial_soc = num(key, e)?,
                "price.water" => cfg.price_water = num(key, e)?,
                "price.gas" => cfg.price_gas = num(key, e)?,
                "price.demand" => cfg.price_demand = num(key, e)?,
                "penalty.cw" => cfg.penalty_cw = parse_auto(key, e, &num)?,
                "penalty.hw" => cfg.penalty_hw = parse_auto(key, e, &num)?,
                "mpc.horizon" => cfg.horizon = int(key, e)? as usize,
                "mpc.demand_weighting" => {
                    cfg.demand_weighting = if e.value == "hours_remaining" {
                        DemandWeighting::HoursRemaining
                    } else {
                        DemandWeighting::Constant(num(key, e).map_err(|_| {
                            err(
                                e.line,
                                format!("`{key}` expects `hours_remaining` or a number, found `{}`", e.value),
                            )
                        })?)
                    }
                }
                "calendar.month_hours" => {
                    cfg.month_hours = e
                        .value
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(e.line, format!("`{key}` expects a comma-separated list of hours")))?
                }
                "forecast.noise" => cfg.forecast_noise = num(key, e)?,
                "forecast.seed" => cfg.forecast_seed = int(key, e)?,
                unit_key => {
                    let name = unit_key.trim_start_matches("unit.");
                    let unit = Unit::ALL.iter().find(|u| u.key() == name).copied().expect("known key");
                    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
                    if parts.len() != 2 {
                        return Err(err(e.line, format!("`{key}` expects `min, max`")));
                    }
                    let lo = parts[0].parse::<f64>().ok().filter(|v| v.is_finite());
                    let hi = parts[1].parse::<f64>().ok().filter(|v| v.is_finite());
                    match (lo, hi) {
                        (Some(lo), Some(hi)) => cfg.unit_bounds[unit.index()] = [lo, hi],
                        _ => return Err(err(e.line, format!("`{key}` expects two finite numbers"))),
                    }
                }
            }
        }

        cfg.validate().map_err(|e| match e {
            Error::Config(msg) => {
                // Point at the line of the first key the message names, if any.
                let line = entries
                    .iter()
                    .filter(|(k, _)| msg.contains(*k))
                    .map(|(_, e)| e.line)
                    .min();
                match line {
                    Some(line) => err(line, msg),
                    None => Error::Config(format!("{origin}: {msg}")),
                }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.alpha;
        let alphas = [
            ("alpha.e_cs", a.e_cs),
            ("alpha.e_hrc", a.e_hrc),
            ("alpha.e_hwg", a.e_hwg),
            ("alpha.ng_hwg", a.ng_hwg),
            ("alpha.e_ct", a.e_ct),
            ("alpha.w_ct", a.w_ct),
            ("alpha.h_hrc", a.h_hrc),
            ("alpha.cond_cs", a.cond_cs),
        ];
        for (k, v) in alphas {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        for u in Unit::ALL {
            let (lo, hi) = self.bounds(u);
            if lo > hi {
                return Err(Error::Config(format!("unit.{} has min {lo} > max {hi}", u.key())));
            }
        }
        for (k, v) in [("storage.cw_capacity", self.capacity_cw), ("storage.hw_capacity", self.capacity_hw)] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.initial_soc) {
            return Err(Error::Config(format!(
                "storage.initial_soc must lie in [0, 1], got {}",
                self.initial_soc
            )));
        }
        for (k, v) in [
            ("price.water", self.price_water),
            ("price.gas", self.price_gas),
            ("price.demand", self.price_demand),
        ] {
            if v < 0.0 {
                return Err(Error::Config(format!("{k} must be nonnegative, got {v}")));
            }
        }
        for (k, v) in [("penalty.cw", self.penalty_cw), ("penalty.hw", self.penalty_hw)] {
            if let Some(v) = v {
                if v < 0.0 {
                    return Err(Error::Config(format!("{k} must be nonnegative, got {v}")));
                }
            }
        }
        if self.horizon < 1 {
            return Err(Error::Config("mpc.horizon must be at least 1".into()));
        }
        if let DemandWeighting::Constant(c) = self.demand_weighting {
            if !(c > 0.0) {
                return Err(Error::Config(format!("mpc.demand_weighting must be positive, got {c}")));
            }
        }
        if self.month_hours.is_empty() || self.month_hours.contains(&0) {
            return Err(Error::Config("calendar.month_hours must list positive lengths".into()));
        }
        if !(0.0..0.9).contains(&self.forecast_noise) {
            return Err(Error::Config(format!(
                "forecast.noise must lie in [0, 0.9), got {}",
                self.forecast_noise
            )));
        }
        // A tank outside its back-off band must be able to return within one hour.
        for (u, cap, k) in [(Unit::Cw, self.capacity_cw, "unit.cw"), (Unit::Hw, self.capacity_hw, "unit.hw")] {
            let (lo, hi) = self.bounds(u);
            if lo > -0.5 * cap || hi < 0.5 * cap {
                return Err(Error::Config(format!(
                    "{k} must allow at least half the tank capacity ({}) per hour in both directions",
                    0.5 * cap
                )));
            }
        }
        Ok(())
    }

    /// Renders the configuration in the file format, with units.
    pub fn to_text(&self) -> String {
        let a = &self.alpha;
        let mut s = String::new();
        s.push_str("# Plant configuration. Units: loads kW, energy kWh, water gal.\n");
        s.push_str("# Conversion coefficients (kW input per kW output; water gal per kWh)\n");
        for (k, v) in [
            ("alpha.e_cs", a.e_cs),
            ("alpha.e_hrc", a.e_hrc),
            ("alpha.e_hwg", a.e_hwg),
            ("alpha.ng_hwg", a.ng_hwg),
            ("alpha.e_ct", a.e_ct),
            ("alpha.w_ct", a.w_ct),
            ("alpha.h_hrc", a.h_hrc),
            ("alpha.cond_cs", a.cond_cs),
        ] {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str("# Hourly unit load bounds `min, max` (kW); cw/hw are storage discharge (negative = charging)\n");
        for u in Unit::ALL {
            let (lo, hi) = self.bounds(u);
            s.push_str(&format!("unit.{} = {lo}, {hi}\n", u.key()));
        }
        s.push_str("# Storage capacities (kWh) and initial state of charge (fraction)\n");
        s.push_str(&format!("storage.cw_capacity = {}\n", self.capacity_cw));
        s.push_str(&format!("storage.hw_capacity = {}\n", self.capacity_hw));
        s.push_str(&format!("storage.initial_soc = {}\n", self.initial_soc));
        s.push_str("# Utility prices: water $/gal, gas $/kWh, demand $/kW per month\n");
        s.push_str(&format!("price.water = {}\n", self.price_water));
        s.push_str(&format!("price.gas = {}\n", self.price_gas));
        s.push_str(&format!("price.demand = {}\n", self.price_demand));
        s.push_str("# Carryover penalties ($/kWh); `auto` = 10x the largest electricity price\n");
        let pen = |p: Option<f64>| p.map_or("auto".to_string(), |v| v.to_string());
        s.push_str(&format!("penalty.cw = {}\n", pen(self.penalty_cw)));
        s.push_str(&format!("penalty.hw = {}\n", pen(self.penalty_hw)));
        s.push_str("# Prediction horizon (hours); demand charge divisor `hours_remaining` or a constant\n");
        s.push_str(&format!("mpc.horizon = {}\n", self.horizon));
        let dw = match self.demand_weighting {
            DemandWeighting::HoursRemaining => "hours_remaining".to_string(),
            DemandWeighting::Constant(c) => c.to_string(),
        };
        s.push_str(&format!("mpc.demand_weighting = {dw}\n"));
        s.push_str("# Billing month lengths (hours), cycled\n");
        let months: Vec<String> = self.month_hours.iter().map(|m| m.to_string()).collect();
        s.push_str(&format!("calendar.month_hours = {}\n", months.join(", ")));
        s.push_str("# Multiplicative load forecast error: relative std and seed\n");
        s.push_str(&format!("forecast.noise = {}\n", self.forecast_noise));
        s.push_str(&format!("forecast.seed = {}\n", self.forecast_seed));
        s
    }

    /// Stable hash of the configuration content.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn parse_auto(key: &str, e: &Entry, num: &dyn Fn(&str, &Entry) -> Result<f64>) -> Result<Option<f64>> {
    if e.value == "auto" {
        Ok(None)
    } else {
        num(key, e).map(Some)
    }
}
