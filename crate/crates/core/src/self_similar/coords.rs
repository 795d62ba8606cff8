use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Domain(format!("{name} = {value} outside [0, 1]")));
    }
    Ok(())
}

/// `σ = ρ / (1 + √(1 - ρ²))`, so that `σ∂σ = ρ√(1 - ρ²)∂ρ`.
pub fn sigma_of_rho(rho: f64) -> Result<f64> {
    check_unit("rho", rho)?;
    Ok(sigma_of_rho_unchecked(rho))
}

/// `ρ = 2σ / (1 + σ²)`.
pub fn rho_of_sigma(sigma: f64) -> Result<f64> {
    check_unit("sigma", sigma)?;
    Ok(rho_of_sigma_unchecked(sigma))
}

#[inline]
pub(crate) fn sigma_of_rho_unchecked(rho: f64) -> f64 {
    rho / (1.0 + (1.0 - rho * rho).sqrt())
}

#[inline]
pub(crate) fn rho_of_sigma_unchecked(sigma: f64) -> f64 {
    2.0 * sigma / (1.0 + sigma * sigma)
}

/// `√(1 - ρ²)` expressed through `σ`: `(1 - σ²)/(1 + σ²)`.
#[inline]
pub(crate) fn cos_of_sigma(sigma: f64) -> f64 {
    (1.0 - sigma * sigma) / (1.0 + sigma * sigma)
}

/// `ρ√(1 - ρ²)`, the factor turning `∂ρ` into `σ∂σ`.
#[inline]
pub(crate) fn euler_factor(rho: f64) -> f64 {
    rho * (1.0 - rho * rho).max(0.0).sqrt()
}

/// Metric of the light cone `{√(x²+y²) < t}` in `(τ, ρ, θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameCoefficients {
    pub tau: f64,
    pub rho: f64,
    pub g_tautau: f64,
    pub g_rhorho: f64,
    pub g_thetatheta: f64,
    /// `√|det g| = τ²ρ / (1 - ρ²)^{3/2}`.
    pub volume: f64,
}

impl FrameCoefficients {
    pub fn new(tau: f64, rho: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::param("tau", format!("must be positive, got {tau}")));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Domain(format!(
                "rho = {rho} outside [0, 1): the frame degenerates on the cone"
            )));
        }
        let q = 1.0 - rho * rho;
        let t2 = tau * tau;
        Ok(Self {
            tau,
            rho,
            g_tautau: -1.0,
            g_rhorho: t2 / (q * q),
            g_thetatheta: t2 * rho * rho / q,
            volume: t2 * rho / q.powf(1.5),
        })
    }

    pub fn inverse(&self) -> [f64; 3] {
        [1.0 / self.g_tautau, 1.0 / self.g_rhorho, 1.0 / self.g_thetatheta]
    }
}

/// `(t, x, y)` of the point with self-similar coordinates `(τ, ρ, θ)`.
pub fn embedding(tau: f64, rho: f64, theta: f64) -> [f64; 3] {
    let t = tau / (1.0 - rho * rho).sqrt();
    [t, rho * t * theta.cos(), rho * t * theta.sin()]
}

/// Inverse of [`embedding`] inside the cone.
pub fn self_similar_coordinates(t: f64, x: f64, y: f64) -> Result<[f64; 3]> {
    let r = x.hypot(y);
    if !(t > 0.0 && r < t) {
        return Err(Error::Domain(format!("({t}, {x}, {y}) is outside the light cone")));
    }
    Ok([((t - r) * (t + r)).sqrt(), r / t, y.atan2(x)])
}
