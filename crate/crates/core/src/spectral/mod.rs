//! Periodic-grid fields, FFT derivatives, fractional powers of `-Δ`,
//! homogeneous Sobolev norms and the exact half-wave propagators.

mod field;
mod grid;
pub mod io;
mod ops;

pub(crate) use field::ensure_same_grid;
pub use field::{Representation, ScalarField, VectorField};
pub use grid::{Grid, DEFAULT_BOX_LENGTH, MAX_POINTS_PER_AXIS};
pub(crate) use ops::differentiate_into;
pub use ops::{
    fractional_laplacian, fractional_laplacian_scalar, half_wave_cos, half_wave_sinc,
    partial_derivative, partial_derivative_scalar, sinc_multiplier, sobolev_norm,
    sobolev_norm_scalar, sobolev_norm_sq, Axis, MEAN_FREE_TOLERANCE,
};
