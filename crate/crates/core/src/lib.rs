//! Numerical laboratory for the muHS equation
//! `-u_txx = -2 mu(u) u_x + 2 u_x u_xx + u u_xxx` on the unit circle.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod hierarchy;
pub mod spectral;
pub mod selftest;
pub mod waves;

pub use error::{MuhsError, Result};
pub use spectral::{PeriodicGrid, RealField};
