//! Closed-loop storage bound update with back-off margins.

use crate::plant::{BackoffTerms, PlantConfig, PlantState, TankBounds};
use serde::{Deserialize, Serialize};

/// Which of the five update cases fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackoffCase {
    /// Inside the band `[βĒ, (1-β)Ē]`.
    InBand,
    /// Above the band but within capacity.
    AboveBand,
    /// Below the band but nonnegative.
    BelowBand,
    /// Overflow: clamped to capacity.
    Overflow,
    /// Dry-up: clamped to empty.
    DryUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TankUpdate {
    pub soc: f64,
    pub bounds: TankBounds,
    pub case: BackoffCase,
    /// Overflow added to the over-production carryover.
    pub overflow: f64,
    /// Deficit added to the under-production carryover.
    pub deficit: f64,
}

/// Applies the update to one tank. Boundary values go to the earlier case.
pub fn update_tank(soc_next: f64, beta: f64, capacity: f64) -> TankUpdate {
    let (lo, hi) = BackoffTerms::band(beta, capacity);
    let bounded = |soc, lower, upper, case| TankUpdate {
        soc,
        bounds: TankBounds { lower, upper },
        case,
        overflow: 0.0,
        deficit: 0.0,
    };
    if lo <= soc_next && soc_next <= hi {
        bounded(soc_next, lo, hi, BackoffCase::InBand)
    } else if hi < soc_next && soc_next <= capacity {
        bounded(soc_next, lo, soc_next, BackoffCase::AboveBand)
    } else if 0.0 <= soc_next && soc_next < lo {
        bounded(soc_next, soc_next, hi, BackoffCase::BelowBand)
    } else if soc_next > capacity {
        TankUpdate {
            overflow: soc_next - capacity,
            ..bounded(capacity, lo, capacity, BackoffCase::Overflow)
        }
    } else {
        debug_assert!(soc_next < 0.0, "non-finite state of charge");
        TankUpdate {
            deficit: -soc_next,
            ..bounded(0.0, 0.0, hi, BackoffCase::DryUp)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackoffUpdate {
    pub cw: TankUpdate,
    pub hw: TankUpdate,
}

/// Clamps the proposed storage levels, moves overflow/deficit into the
/// carryovers and sets the next first-step bounds, writing into `state`.
pub fn apply_backoff_update(
    state: &mut PlantState,
    soc_next_cw: f64,
    soc_next_hw: f64,
    backoff: BackoffTerms,
    config: &PlantConfig,
) -> BackoffUpdate {
    let cw = update_tank(soc_next_cw, backoff.cw, config.capacity_cw);
    let hw = update_tank(soc_next_hw, backoff.hw, config.capacity_hw);
    state.soc_cw = cw.soc;
    state.soc_hw = hw.soc;
    state.bounds_cw = cw.bounds;
    state.bounds_hw = hw.bounds;
    state.ol_cw += cw.overflow;
    state.ol_hw += hw.overflow;
    state.ul_cw += cw.deficit;
    state.ul_hw += hw.deficit;
    BackoffUpdate { cw, hw }
}
