use serde::{Deserialize, Serialize};

use super::coords::{cos_of_sigma, embedding, euler_factor, self_similar_coordinates, sigma_of_rho_unchecked};
use super::polar::MIN_RADIAL_NODES;
use super::profile::{cross3, dot3, Parametrization, ProfileDerivatives, SelfSimilarProfile};
use crate::error::{Error, Result};

/// Residual field of the reduced equation, ring by ring.
#[derive(Clone, Debug)]
pub struct ResidualField {
    pub values: Vec<[f64; 3]>,
    /// `ρ√(1-ρ²)∂ρ(ρ√(1-ρ²)∂ρ v) + ∂²θ v`
    pub lhs: Vec<[f64; 3]>,
    /// `2ρ v_ρ ∧ v_θ`
    pub rhs: Vec<[f64; 3]>,
}

impl ResidualField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn rms(&self) -> f64 {
        let sq: f64 = self.values.iter().map(|v| dot3(*v, *v)).sum();
        (sq / (3 * self.values.len()) as f64).sqrt()
    }
}

/// `σv_σ` in the stored radial variable.
pub(crate) fn euler_derivative(p: Parametrization, r: f64, dv: [f64; 3]) -> [f64; 3] {
    let f = match p {
        Parametrization::Rho => euler_factor(r),
        Parametrization::Sigma => r,
    };
    dv.map(|x| f * x)
}

/// Pointwise `LHS − RHS` of
/// `ρ√(1-ρ²)∂ρ(ρ√(1-ρ²)∂ρ v) + ∂²θ v = 2ρ v_ρ ∧ v_θ`.
///
/// For a `ρ`-sampled profile the expanded form
/// `ρ²(1-ρ²)v_ρρ + ρ(1-2ρ²)v_ρ + v_θθ − 2ρ v_ρ∧v_θ` is used. For a
/// `σ`-sampled one the left side is `σ²v_σσ + σv_σ + v_θθ` and the right side
/// `2σ(1+σ²)/(1-σ²) v_σ∧v_θ`. On `σ = 1` that coefficient is unbounded; the
/// ring reports the equation multiplied by `(1-σ²)/(2σ(1+σ²))`, which leaves
/// `-v_σ∧v_θ`.
pub fn reduced_residual(v: &SelfSimilarProfile) -> Result<ResidualField> {
    let grid = v.grid();
    if grid.radial_len() < MIN_RADIAL_NODES {
        return Err(Error::InvalidGrid(format!(
            "reduced residual needs at least {MIN_RADIAL_NODES} radial nodes, got {}",
            grid.radial_len()
        )));
    }
    let d = v.derivatives();
    Ok(residual_from(v.parametrization(), grid.nodes(), grid.theta_len(), &d))
}

pub(crate) fn residual_from(p: Parametrization, nodes: &[f64], m: usize, d: &ProfileDerivatives) -> ResidualField {
    let len = d.radial.len();
    let mut values = Vec::with_capacity(len);
    let mut lhs = Vec::with_capacity(len);
    let mut rhs = Vec::with_capacity(len);
    for (i, &r) in nodes.iter().enumerate() {
        let (a, b, c) = match p {
            Parametrization::Rho => (r * r * (1.0 - r * r), r * (1.0 - 2.0 * r * r), 2.0 * r),
            Parametrization::Sigma => {
                let c = if r < 1.0 { 2.0 * r / cos_of_sigma(r) } else { f64::INFINITY };
                (r * r, r, c)
            }
        };
        for j in 0..m {
            let k = i * m + j;
            let (v1, v2, vt, vtt) = (d.radial[k], d.radial2[k], d.theta[k], d.theta2[k]);
            let l = [0, 1, 2].map(|q| a * v2[q] + b * v1[q] + vtt[q]);
            let w = cross3(v1, vt);
            let (l, rt) = if c.is_finite() { (l, w.map(|x| c * x)) } else { ([0.0; 3], w) };
            lhs.push(l);
            rhs.push(rt);
            values.push([l[0] - rt[0], l[1] - rt[1], l[2] - rt[2]]);
        }
    }
    ResidualField { values, lhs, rhs }
}

/// One ring of the `σ`-form residual
/// `v_σσ + v_σ/σ + v_θθ/σ² − 2/(σ√(1-ρ²)) v_σ∧v_θ`.
#[derive(Clone, Debug)]
pub struct SigmaRing {
    pub sigma: f64,
    pub values: Vec<[f64; 3]>,
}

/// The `σ`-form residual on the rings with `0 < σ < 1`, where it is regular.
/// Requires a `σ`-sampled profile.
pub fn sigma_form_residual(v: &SelfSimilarProfile) -> Result<Vec<SigmaRing>> {
    if v.parametrization() != Parametrization::Sigma {
        return Err(Error::param("parametrization", "the σ-form needs a σ-sampled profile"));
    }
    let grid = v.grid();
    let m = grid.theta_len();
    let d = v.derivatives();
    let mut out = Vec::new();
    for (i, &s) in grid.nodes().iter().enumerate() {
        if s <= 0.0 || s >= 1.0 {
            continue;
        }
        let coefficient = 2.0 / (s * cos_of_sigma(s));
        let values = (0..m)
            .map(|j| {
                let k = i * m + j;
                let w = cross3(d.radial[k], d.theta[k]);
                [0, 1, 2].map(|q| {
                    d.radial2[k][q] + d.radial[k][q] / s + d.theta2[k][q] / (s * s) - coefficient * w[q]
                })
            })
            .collect();
        out.push(SigmaRing { sigma: s, values });
    }
    Ok(out)
}

/// `∫₀^{2π} [ρ²(1-ρ²)|v_ρ|² − |v_θ|²] dθ` at `rho`.
pub fn identity_integral(v: &SelfSimilarProfile, rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho = {rho} outside [0, 1]")));
    }
    let d = v.derivatives();
    Ok(identity_integral_with(v, &d, rho))
}

fn identity_integral_with(v: &SelfSimilarProfile, d: &ProfileDerivatives, rho: f64) -> f64 {
    let p = v.parametrization();
    let r = p.coordinate(rho);
    let radial = v.ring_at(&d.radial, r);
    let theta = v.ring_at(&d.theta, r);
    let h = v.grid().theta_step();
    radial
        .iter()
        .zip(&theta)
        .map(|(a, b)| {
            let e = euler_derivative(p, r, *a);
            h * (dot3(e, e) - dot3(*b, *b))
        })
        .sum()
}

/// [`identity_integral`] at every radial node, as `(ρ, I(ρ))`.
pub fn identity_profile(v: &SelfSimilarProfile) -> Vec<(f64, f64)> {
    let d = v.derivatives();
    let p = v.parametrization();
    let m = v.grid().theta_len();
    let h = v.grid().theta_step();
    v.grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let total = (0..m)
                .map(|j| {
                    let k = i * m + j;
                    let e = euler_derivative(p, r, d.radial[k]);
                    h * (dot3(e, e) - dot3(d.theta[k], d.theta[k]))
                })
                .sum();
            (p.rho(r), total)
        })
        .collect()
}

/// `max − min` of the identity integral over nodes with `ρ ∈ [δ, 1 − δ]`.
pub fn identity_spread(v: &SelfSimilarProfile, delta: f64) -> f64 {
    let values: Vec<f64> = identity_profile(v)
        .into_iter()
        .filter(|(rho, _)| *rho >= delta && *rho <= 1.0 - delta)
        .map(|(_, i)| i)
        .collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if values.is_empty() { 0.0 } else { max - min }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    /// `∫_𝔻 σv_σ · Δv` over the unit `σ`-disc.
    pub interior: f64,
    /// `∫₀^{2π} ½|v_σ|² dθ` on `σ = 1`.
    pub boundary: f64,
    /// `max |v_θ|` on `σ = 1` after normalization.
    pub boundary_theta_defect: f64,
}

/// Boundary energy `∫₀^{2π} ½|v_σ|²|_{σ=1} dθ` by two routes: the disc
/// integral of `σv_σ·(v_σσ + v_σ/σ + v_θθ/σ²)` in polar measure, which is an
/// exact divergence, and the trace on `σ = 1`. The profile is normalized by
/// its boundary average first and must have `v_θ = 0` on `σ = 1`.
pub fn pohozaev_boundary_integral(v: &SelfSimilarProfile, tolerance: f64) -> Result<PohozaevReport> {
    if v.parametrization() != Parametrization::Sigma {
        return Err(Error::param("parametrization", "needs a σ-sampled profile"));
    }
    let v = v.normalized();
    let grid = v.grid();
    let (n, m) = (grid.radial_len(), grid.theta_len());
    let d = v.derivatives();
    let scale = v.values().iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
    let outer = (n - 1) * m;
    let defect = d.theta[outer..].iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if defect > tolerance * scale {
        return Err(Error::Domain(format!(
            "v_θ on σ = 1 is {defect:e}, above the tolerance {tolerance:e}"
        )));
    }
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| {
            let d = &d;
            (0..m).map(move |j| {
                let k = i * m + j;
                s * s * dot3(d.radial[k], d.radial2[k]) + s * dot3(d.radial[k], d.radial[k]) + dot3(d.radial[k], d.theta2[k])
            })
        })
        .collect();
    let h = grid.theta_step();
    let boundary = d.radial[outer..].iter().map(|x| 0.5 * h * dot3(*x, *x)).sum();
    Ok(PohozaevReport {
        interior: grid.integrate(&integrand),
        boundary,
        boundary_theta_defect: defect,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricAudit {
    pub tau: f64,
    pub points: usize,
    pub max_error: f64,
    pub max_reference: f64,
    pub relative_error: f64,
}

const FD6: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];

/// Compares `□[v(x/t, y/t)] = (−∂²t + ∂²x + ∂²y) u` by sixth-order central
/// differences in `(t, x, y)` with `LHS(v) / (x² + y²)`, LHS the left side of
/// the reduced equation, at grid nodes with `ρ ∈ [0.1, 0.9]` on the
/// hypersurface of constant `τ`. Requires a `ρ`-sampled profile.
pub fn metric_audit(v: &SelfSimilarProfile, tau: f64, step: f64) -> Result<MetricAudit> {
    if v.parametrization() != Parametrization::Rho {
        return Err(Error::param("parametrization", "the metric audit needs a ρ-sampled profile"));
    }
    if !(tau > 0.0 && step > 0.0) {
        return Err(Error::param("tau/step", "must be positive"));
    }
    let residual = reduced_residual(v)?;
    let grid = v.grid();
    let m = grid.theta_len();
    let u = |t: f64, x: f64, y: f64| -> Result<[f64; 3]> {
        let [_, rho, theta] = self_similar_coordinates(t, x, y)?;
        Ok(v.eval(rho, theta))
    };
    let (mut max_error, mut max_reference, mut points) = (0.0f64, 0.0f64, 0usize);
    for (i, &rho) in grid.nodes().iter().enumerate() {
        if !(0.1..=0.9).contains(&rho) {
            continue;
        }
        for j in (0..m).step_by(4) {
            let [t, x, y] = embedding(tau, rho, grid.theta(j));
            let mut box_op = [0.0; 3];
            for (axis, sign) in [(0usize, -1.0), (1, 1.0), (2, 1.0)] {
                for (o, c) in FD6.iter().enumerate() {
                    let shift = (o as f64 - 3.0) * step;
                    let mut p = [t, x, y];
                    p[axis] += shift;
                    let val = u(p[0], p[1], p[2])?;
                    for q in 0..3 {
                        box_op[q] += sign * c * val[q] / (step * step);
                    }
                }
            }
            let lhs = residual.lhs[i * m + j];
            let factor = 1.0 / (x * x + y * y);
            for q in 0..3 {
                max_error = max_error.max((box_op[q] - factor * lhs[q]).abs());
                max_reference = max_reference.max(box_op[q].abs());
            }
            points += 1;
        }
    }
    Ok(MetricAudit {
        tau,
        points,
        max_error,
        max_reference,
        relative_error: max_error / max_reference.max(f64::MIN_POSITIVE),
    })
}

/// `I(ρ)` from the identity integral and the exact derivative
/// `dI/dρ = 2/(ρ√(1-ρ²)) ∫ (σv_σ)·R dθ`, R the residual, on interior nodes.
/// Returns `(ρ, dI/dρ by spectral differentiation, dI/dρ from the residual)`.
pub fn identity_derivative_check(v: &SelfSimilarProfile) -> Result<Vec<(f64, f64, f64)>> {
    let residual = reduced_residual(v)?;
    let p = v.parametrization();
    let grid = v.grid();
    let m = grid.theta_len();
    let d = v.derivatives();
    let values: Vec<f64> = identity_profile(v).into_iter().map(|(_, i)| i).collect();
    let di_dr = grid.differentiate_radial(&values);
    let h = grid.theta_step();
    let mut out = Vec::new();
    for (i, &r) in grid.nodes().iter().enumerate() {
        let rho = p.rho(r);
        if rho <= 0.0 || rho >= 1.0 {
            continue;
        }
        let projected: f64 = (0..m)
            .map(|j| {
                let k = i * m + j;
                h * dot3(euler_derivative(p, r, d.radial[k]), residual.values[k])
            })
            .sum();
        // dI/dρ = dI/dr · dr/dρ
        let dr_drho = match p {
            Parametrization::Rho => 1.0,
            Parametrization::Sigma => sigma_of_rho_unchecked(rho) / euler_factor(rho),
        };
        out.push((rho, di_dr[i] * dr_drho, 2.0 * projected / euler_factor(rho)));
    }
    Ok(out)
}
