//! Ground-state preparation in a finite Jaynes-Cummings lattice by optimal control.

pub mod app;
pub mod config;
pub mod controls;
pub mod error;
pub mod fockspace;
pub mod lindblad;
pub mod model;
pub mod optimizer;
pub mod propagate;
pub mod speedlimit;
pub mod spectrum;

pub use error::{Error, Result};
