//! Fourier-side checks of the `Q₁₂` bilinear estimate for half waves:
//! the change of variables `τ = |ξ - ρω| + ρ`, the pointwise kernel bound
//! `≤ ½`, the convolution density and an empirical constant.

mod constant;
mod density;
mod kernel;

pub use constant::{
    estimate_constant, ConstantEstimate, ConstantOptions, HalfWavePair, HalfWaveSign,
    PairStatistics, SignPair,
};
pub use density::{
    convolution_density, in_quarter_band, windowed_density, windowed_product_transform,
    GaussianBump, GaussianWindow, ProfileFamily, SpectralProfile, DEFAULT_CIRCLE_NODES,
};
pub use kernel::{
    change_of_variables_error, denominator_identity_error, jacobian, jacobian_fd_error,
    kernel_quotient, kernel_sample, lattice_scan, monte_carlo_scan, rho_decomposition_error,
    rho_of, KernelSample, ScanRanges, ScanReport, DEFAULT_FD_STEP, QUOTIENT_CROSS_CHECK,
};
