//! Quasi-static modeling and design exploration for a passive
//! variable-radius wheel.

pub mod behavior;
pub mod commands;
pub mod config;
pub mod design_space;
pub mod error;
pub mod locomotion;
pub mod report;
pub mod wheel;

pub use error::{MorphError, Result};
