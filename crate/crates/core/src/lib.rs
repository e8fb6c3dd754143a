#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod force;
pub mod integrate;
pub mod limit_cycle;
pub mod nc_optimal;
pub mod numeric;
pub mod polynomial;
pub mod system;
pub mod total_work;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
