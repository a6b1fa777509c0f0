//! Grids, calculus on sampled functions, quadrature and special functions.

mod calculus;
mod elliptic;
mod grid;
pub mod quadrature;
mod sampled;
mod spline;

pub use calculus::{
    derivative, derivative_with, inner, integrate_cumulative, l2_normalize, masked_norm, norm,
    wronskian, Stencil,
};
pub use elliptic::{complete_elliptic_e, incomplete_elliptic_e};
pub use grid::{build_grid, Grid, MIN_POINTS};
pub(crate) use grid::same_grid;
pub use sampled::SampledFunction;
pub use spline::CubicSpline;
