//! Willmore-type energies, Euler–Lagrange residuals and Noether conservation
//! laws for immersions sampled on structured parameter grids.

pub mod acceptance;
pub mod analysis;
pub mod chart;
pub mod cli;
pub mod conservation2d;
pub mod conservation4d;
pub mod elliptic;
pub mod energies;
pub mod error;
pub mod exterior;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod shapes;

pub use error::{Result, WkitError};
