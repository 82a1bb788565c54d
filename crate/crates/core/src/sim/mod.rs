//! Closed-loop operation of the plant under the MPC.

pub mod backoff;
pub mod closed_loop;
pub mod series;

pub use backoff::{apply_backoff_update, update_tank, BackoffCase, BackoffUpdate, TankUpdate};
pub use closed_loop::{
    plant_step, simulate, simulate_with, AbortReport, Calendar, ClosedLoopResult, CostBreakdown,
    HourRecord, PlantStep, SimOptions, Tank, Violation, ViolationKind,
};
pub use series::{campus_fixture, zero_fixture, DisturbanceSeries, ForecastGenerator, HourDisturbance};
