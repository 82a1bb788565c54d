//! Realized disturbance series, forecasts derived from them, and synthetic
//! fixtures.

use crate::error::{Error, Result};
use crate::plant::ForecastWindow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Hourly realized loads (kW) and electricity price ($/kWh).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DisturbanceSeries {
    pub load_e: Vec<f64>,
    pub load_cw: Vec<f64>,
    pub load_hw: Vec<f64>,
    pub price_e: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    hour: usize,
    #[serde(rename = "L_e")]
    load_e: f64,
    #[serde(rename = "L_cw")]
    load_cw: f64,
    #[serde(rename = "L_hw")]
    load_hw: f64,
    price_e: f64,
}

/// Realized values of a single hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourDisturbance {
    pub load_e: f64,
    pub load_cw: f64,
    pub load_hw: f64,
    pub price_e: f64,
}

impl DisturbanceSeries {
    pub fn len(&self) -> usize {
        self.load_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.load_e.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.load_cw.len() != n || self.load_hw.len() != n || self.price_e.len() != n {
            return Err(Error::Dimension("series columns differ in length".into()));
        }
        for (hour, h) in (0..n).map(|t| (t, self.hour(t))) {
            let vals = [h.load_e, h.load_cw, h.load_hw, h.price_e];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("series hour {hour}: non-finite value")));
            }
            if vals[..3].iter().any(|v| *v < 0.0) {
                return Err(Error::Config(format!("series hour {hour}: negative load")));
            }
        }
        Ok(())
    }

    pub fn hour(&self, t: usize) -> HourDisturbance {
        HourDisturbance {
            load_e: self.load_e[t],
            load_cw: self.load_cw[t],
            load_hw: self.load_hw[t],
            price_e: self.price_e[t],
        }
    }

    pub fn push(&mut self, h: HourDisturbance) {
        self.load_e.push(h.load_e);
        self.load_cw.push(h.load_cw);
        self.load_hw.push(h.load_hw);
        self.price_e.push(h.price_e);
    }

    /// Reads `hour,L_e,L_cw,L_hw,price_e`. Hours must be 0, 1, 2, ...
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut s = DisturbanceSeries::default();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if row.hour != i {
                return Err(Error::Config(format!(
                    "{}: expected hour {i}, found {}",
                    path.display(),
                    row.hour
                )));
            }
            s.push(HourDisturbance {
                load_e: row.load_e,
                load_cw: row.load_cw,
                load_hw: row.load_hw,
                price_e: row.price_e,
            });
        }
        s.validate()?;
        Ok(s)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for t in 0..self.len() {
            let h = self.hour(t);
            w.serialize(Row {
                hour: t,
                load_e: h.load_e,
                load_cw: h.load_cw,
                load_hw: h.load_hw,
                price_e: h.price_e,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// SHA-256 of the values, used for grid provenance.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for v in self.load_e.iter().chain(&self.load_cw).chain(&self.load_hw).chain(&self.price_e) {
            h.update(v.to_le_bytes());
        }
        h.update((self.len() as u64).to_le_bytes());
        hex::encode(h.finalize())
    }

    pub fn slice(&self, start: usize, len: usize) -> DisturbanceSeries {
        let r = start..start + len;
        DisturbanceSeries {
            load_e: self.load_e[r.clone()].to_vec(),
            load_cw: self.load_cw[r.clone()].to_vec(),
            load_hw: self.load_hw[r.clone()].to_vec(),
            price_e: self.price_e[r].to_vec(),
        }
    }
}

/// Load forecasts issued each hour.
///
/// The realized load is modelled as `forecast * (1 + eps)` with
/// `eps ~ N(0, noise)` clipped to `[-0.9, 0.9]`, drawn independently for every
/// (issue hour, target hour, load) triple. Prices are forecast exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastGenerator {
    pub noise: f64,
    pub seed: u64,
}

impl ForecastGenerator {
    pub fn new(noise: f64, seed: u64) -> Self {
        ForecastGenerator { noise, seed }
    }

    pub fn perfect() -> Self {
        ForecastGenerator { noise: 0.0, seed: 0 }
    }

    /// Forecast over `[t, t + horizon)` as seen at hour `t`.
    pub fn window(&self, series: &DisturbanceSeries, t: usize, horizon: usize) -> Result<ForecastWindow> {
        if t + horizon > series.len() {
            return Err(Error::Dimension(format!(
                "series has {} hours, forecast at {t} needs {}",
                series.len(),
                t + horizon
            )));
        }
        let r = t..t + horizon;
        let mut w = ForecastWindow {
            load_e: series.load_e[r.clone()].to_vec(),
            load_cw: series.load_cw[r.clone()].to_vec(),
            load_hw: series.load_hw[r.clone()].to_vec(),
            price_e: series.price_e[r].to_vec(),
        };
        if self.noise > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(t as u64);
            let dist = Normal::new(0.0, self.noise)
                .map_err(|e| Error::Config(format!("forecast noise: {e}")))?;
            for v in w.load_e.iter_mut().chain(w.load_cw.iter_mut()).chain(w.load_hw.iter_mut()) {
                let eps: f64 = dist.sample(&mut rng);
                *v /= 1.0 + eps.clamp(-0.9, 0.9);
            }
        }
        Ok(w)
    }
}

/// Synthetic campus series with daily and weekly load cycles and a
/// time-of-use electricity tariff. Hour 0 is Monday 00:00.
///
/// The cooling load peaks mid-afternoon, heating in the early morning, and
/// weekends run at about 70% of weekday loads. `seed` adds small, smooth
/// day-to-day variation.
pub fn campus_fixture(hours: usize, seed: u64) -> DisturbanceSeries {
    use rand::Rng;
    use std::f64::consts::TAU;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let days = hours.div_ceil(24) + 1;
    let day_scale: Vec<[f64; 3]> = (0..days)
        .map(|_| [rng.gen_range(0.9..1.1), rng.gen_range(0.85..1.15), rng.gen_range(0.85..1.15)])
        .collect();
    let mut s = DisturbanceSeries::default();
    for t in 0..hours {
        let day = t / 24;
        let hod = (t % 24) as f64;
        let weekend = day % 7 >= 5;
        let week_factor = if weekend { 0.7 } else { 1.0 };
        let phase = TAU * hod / 24.0;
        let [se, scw, shw] = day_scale[day];
        let occupancy = (-((hod - 13.0) / 4.5).powi(2)).exp();
        let load_e = week_factor * se * (650.0 + 450.0 * occupancy);
        let load_cw = week_factor * scw * (850.0 + 450.0 * (phase - 2.1 * TAU / 6.0).sin().max(-0.6) + 150.0 * occupancy);
        let load_hw = week_factor * shw * (450.0 + 180.0 * (phase + TAU / 4.0).sin());
        let price_e = if !weekend && (12.0..18.0).contains(&hod) {
            0.14
        } else if (8.0..21.0).contains(&hod) {
            0.085
        } else {
            0.045
        };
        s.push(HourDisturbance {
            load_e,
            load_cw: load_cw.max(0.0),
            load_hw: load_hw.max(0.0),
            price_e,
        });
    }
    s
}

/// All-zero loads and prices.
pub fn zero_fixture(hours: usize) -> DisturbanceSeries {
    let zero = HourDisturbance { load_e: 0.0, load_cw: 0.0, load_hw: 0.0, price_e: 0.0 };
    let mut s = DisturbanceSeries::default();
    for _ in 0..hours {
        s.push(zero);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let s = campus_fixture(50, 3);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        s.write_csv(&p).unwrap();
        let back = DisturbanceSeries::read_csv(&p).unwrap();
        assert_eq!(s, back);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("hour,L_e,L_cw,L_hw,price_e\n"));
    }

    #[test]
    fn csv_rejects_gaps_and_negative_loads() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "hour,L_e,L_cw,L_hw,price_e\n0,1,1,1,0.1\n2,1,1,1,0.1\n").unwrap();
        assert!(matches!(DisturbanceSeries::read_csv(&p), Err(Error::Config(_))));
        std::fs::write(&p, "hour,L_e,L_cw,L_hw,price_e\n0,1,-1,1,0.1\n").unwrap();
        assert!(matches!(DisturbanceSeries::read_csv(&p), Err(Error::Config(_))));
    }

    #[test]
    fn perfect_forecast_is_the_realization() {
        let s = campus_fixture(72, 1);
        let w = ForecastGenerator::perfect().window(&s, 10, 24).unwrap();
        assert_eq!(w.load_cw, s.load_cw[10..34]);
        assert_eq!(w.price_e, s.price_e[10..34]);
    }

    #[test]
    fn noisy_forecast_is_seeded_and_keeps_prices() {
        let s = campus_fixture(72, 1);
        let g = ForecastGenerator::new(0.1, 5);
        let a = g.window(&s, 3, 24).unwrap();
        assert_eq!(a, g.window(&s, 3, 24).unwrap());
        assert_ne!(a, ForecastGenerator::new(0.1, 6).window(&s, 3, 24).unwrap());
        assert_eq!(a.price_e, s.price_e[3..27]);
        let rel: Vec<f64> = (0..24).map(|k| s.load_cw[3 + k] / a.load_cw[k] - 1.0).collect();
        assert!(rel.iter().all(|e| e.abs() <= 0.9 + 1e-12));
        assert!(rel.iter().any(|e| e.abs() > 1e-3));
    }

    #[test]
    fn window_past_the_end_is_an_error() {
        let s = zero_fixture(10);
        assert!(ForecastGenerator::perfect().window(&s, 5, 6).is_err());
        assert!(ForecastGenerator::perfect().window(&s, 4, 6).is_ok());
    }

    #[test]
    fn fixture_is_deterministic_and_valid() {
        let a = campus_fixture(24 * 14, 11);
        assert_eq!(a, campus_fixture(24 * 14, 11));
        a.validate().unwrap();
        assert_eq!(a.hash(), campus_fixture(24 * 14, 11).hash());
        assert_ne!(a.hash(), campus_fixture(24 * 14, 12).hash());
    }
}
