//! Numerical laboratory for the constant-mean-curvature wave equation
//! `(-∂ₜ² + Δ)u = 2 uₓ ∧ u_y` on `ℝ^{1+2}`.
//!
//! * [`spectral`]: periodic fields, Fourier multipliers, Sobolev norms.
//! * [`null_forms`]: the bilinear forms `Q₀₀`, `Q_ij`, `Q₀ⱼ` and the wedge nonlinearity.
//! * [`duhamel`]: Picard iteration on the Duhamel formula, its constant
//!   schedule and contraction ledger, and a split-step oracle.
//! * [`bilinear`]: Fourier-side kernel checks for the `Q₁₂` estimate and
//!   empirical estimation of its constant.
//! * [`self_similar`]: self-similar coordinates, reduced profile equation,
//!   conservation identities and a profile falsification search.
//! * [`harness`]: run configuration, reports and replay.

pub mod bilinear;
pub mod duhamel;
mod error;
pub mod harness;
pub mod null_forms;
pub mod numeric;
pub mod rng;
pub mod self_similar;
pub mod spectral;

pub use error::{Error, Result};
