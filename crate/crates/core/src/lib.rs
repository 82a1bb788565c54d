#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bo;
pub mod cli;
pub mod error;
pub mod gp;
pub mod lp;
pub mod objective;
pub mod plant;
pub mod sim;

pub use error::{Error, Result};
