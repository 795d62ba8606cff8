//! Self-similar frame `(τ, ρ, θ)` inside the light cone, the reduced
//! equation for profiles `u(t, x, y) = v(x/t, y/t)`, its conserved quantities
//! and a numerical search for nonconstant profiles.

mod basis;
mod coords;
mod equation;
mod io;
mod polar;
mod profile;
mod search;

pub use coords::{embedding, rho_of_sigma, self_similar_coordinates, sigma_of_rho, FrameCoefficients};
pub use equation::{
    identity_derivative_check, identity_integral, identity_profile, identity_spread, metric_audit,
    pohozaev_boundary_integral, reduced_residual, sigma_form_residual, MetricAudit, PohozaevReport, ResidualField,
    SigmaRing,
};
pub use io::{
    decode_profile, encode_profile, identity_to_csv, read_profile, write_profile, ProfileSidecar, PROFILE_FORMAT,
    PROFILE_FORMAT_VERSION,
};
pub use polar::{PolarGrid, PolarShape, Radial, MAX_NODES, MIN_RADIAL_NODES, MIN_THETA_NODES};
pub use profile::{Parametrization, ProfileDerivatives, SelfSimilarProfile, POLE_TOLERANCE};
pub use basis::{BasisFunction, ModalBasis};
pub use search::{
    falsification_suite, profile_search, profile_search_from, Classification, SearchOptions, SearchRun, SearchSuite,
    REGULARITY_NOTE,
};
