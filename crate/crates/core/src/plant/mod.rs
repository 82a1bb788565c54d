//! Central plant model: configuration and the MPC linear program.

pub mod config;
pub mod mpc;

pub use config::{Conversion, DemandWeighting, PlantConfig, Unit};
pub use mpc::{
    build_mpc_lp, extract_first_action, lp_size, BackoffTerms, ControlAction, ForecastWindow,
    PlantState, TankBounds,
};
