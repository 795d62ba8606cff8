use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Tolerance between the simplified and unsimplified kernel quotient.
pub const QUOTIENT_CROSS_CHECK: f64 = 1e-10;
const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub xi: [f64; 2],
    pub tau: f64,
    pub omega: [f64; 2],
    pub rho: f64,
    pub drho_dtau: f64,
    pub quotient: f64,
}

fn validate(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> Result<()> {
    if !(xi.iter().all(|v| v.is_finite()) && tau.is_finite() && omega.iter().all(|v| v.is_finite()))
    {
        return Err(Error::Domain("non-finite kernel arguments".into()));
    }
    let norm = omega[0].hypot(omega[1]);
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::param(
            "omega",
            format!("must be a unit vector, |ω| = {norm}"),
        ));
    }
    let r = xi[0].hypot(xi[1]);
    if tau < r {
        return Err(Error::Domain(format!("τ = {tau} below |ξ| = {r}")));
    }
    Ok(())
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn cross(xi: [f64; 2], omega: [f64; 2]) -> f64 {
    xi[0] * omega[1] - xi[1] * omega[0]
}

/// `τ² - |ξ|²` in factored form.
#[inline]
fn cone(xi: [f64; 2], tau: f64) -> f64 {
    let r = xi[0].hypot(xi[1]);
    (tau - r) * (tau + r)
}

/// `τ - ξ·ω`, written as `(τ - |ξ|) + X²/(|ξ| + ξ·ω)` when `ξ·ω > 0` so
/// that nothing cancels near the light cone.
#[inline]
fn gap(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> f64 {
    let c = dot(xi, omega);
    if c > 0.0 {
        let r = xi[0].hypot(xi[1]);
        let x = cross(xi, omega);
        (tau - r) + x * x / (r + c)
    } else {
        tau - c
    }
}

#[inline]
pub(crate) fn rho_raw(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> f64 {
    cone(xi, tau) / (2.0 * gap(xi, tau, omega))
}

/// `ρ - ξ·ω = s/2 - X²/(2s)` with `s = τ - ξ·ω`.
#[inline]
fn rho_shifted(s: f64, x: f64) -> f64 {
    0.5 * s - x * x / (2.0 * s)
}

/// `ρ = (τ² - |ξ|²) / (2(τ - ξ·ω))`, the radius with `|ξ - ρω| + ρ = τ`.
pub fn rho_of(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> Result<f64> {
    validate(xi, tau, omega)?;
    let d = gap(xi, tau, omega);
    if d <= 0.0 {
        return Err(Error::Domain(
            "τ = |ξ| with ω parallel to ξ: ρ is undefined".into(),
        ));
    }
    Ok(cone(xi, tau) / (2.0 * d))
}

/// `τ² - 2τξ·ω + |ξ|² = (τ - ξ·ω)² + (ξ₁ω₂ - ξ₂ω₁)²`, evaluated in the
/// right-hand form.
#[inline]
fn stable_denominator(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> f64 {
    let d = gap(xi, tau, omega);
    let x = cross(xi, omega);
    d * d + x * x
}

fn ensure_interior(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> Result<()> {
    validate(xi, tau, omega)?;
    if tau <= xi[0].hypot(xi[1]) {
        return Err(Error::Domain("τ must exceed |ξ|".into()));
    }
    Ok(())
}

/// `∂ρ/∂τ = (τ² - 2τξ·ω + |ξ|²) / (2(τ - ξ·ω)²)`.
pub fn jacobian(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> Result<f64> {
    ensure_interior(xi, tau, omega)?;
    Ok(jacobian_raw(xi, tau, omega))
}

#[inline]
fn jacobian_raw(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> f64 {
    let d = gap(xi, tau, omega);
    stable_denominator(xi, tau, omega) / (2.0 * d * d)
}

/// `ρ²(ξ₁ω₂ - ξ₂ω₁)² / (τ² - |ξ|²)² · ∂τ/∂ρ` in its simplified form
/// `(ξ₁ω₂ - ξ₂ω₁)² / (2(τ² - 2τξ·ω + |ξ|²))`, cross-checked against the
/// unsimplified product.
pub fn kernel_quotient(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> Result<f64> {
    Ok(kernel_sample(xi, tau, omega)?.quotient)
}

pub fn kernel_sample(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> Result<KernelSample> {
    ensure_interior(xi, tau, omega)?;
    let rho = rho_raw(xi, tau, omega);
    let drho_dtau = jacobian_raw(xi, tau, omega);
    let x = cross(xi, omega);
    let quotient = x * x / (2.0 * stable_denominator(xi, tau, omega));
    let c = cone(xi, tau);
    let unsimplified = (rho / c).powi(2) * x * x / drho_dtau;
    if (unsimplified - quotient).abs() > QUOTIENT_CROSS_CHECK * quotient.max(1.0) {
        return Err(Error::Numerical(format!(
            "kernel quotient {quotient:e} disagrees with unsimplified {unsimplified:e}"
        )));
    }
    Ok(KernelSample {
        xi,
        tau,
        omega,
        rho,
        drho_dtau,
        quotient,
    })
}

/// `|(τ² - 2τξ·ω + |ξ|²) - ((τ - ξ·ω)² + (ξ₁ω₂ - ξ₂ω₁)²)|` relative to
/// `τ² + |ξ|²`.
pub fn denominator_identity_error(xi: [f64; 2], tau: f64, omega: [f64; 2]) -> f64 {
    let r2 = dot(xi, xi);
    let expanded = tau * tau - 2.0 * tau * dot(xi, omega) + r2;
    (expanded - stable_denominator(xi, tau, omega)).abs() / (tau * tau + r2)
}

/// `| |ξ - ρω| + ρ - τ |`
pub fn change_of_variables_error(sample: &KernelSample) -> f64 {
    let a = sample.xi[0] - sample.rho * sample.omega[0];
    let b = sample.xi[1] - sample.rho * sample.omega[1];
    (a.hypot(b) + sample.rho - sample.tau).abs()
}

/// Relative mismatch between [`jacobian`] and a central difference in `τ`
/// with step `h · (τ - ξ·ω)`. The difference is taken on `ρ - ξ·ω`, which
/// does not depend on `τ`, so the constant part of `ρ` drops out before
/// rounding.
pub fn jacobian_fd_error(sample: &KernelSample, h: f64) -> f64 {
    let s = gap(sample.xi, sample.tau, sample.omega);
    let x = cross(sample.xi, sample.omega);
    let step = h * s;
    let fd = (rho_shifted(s + step, x) - rho_shifted(s - step, x)) / (2.0 * step);
    (fd - sample.drho_dtau).abs() / sample.drho_dtau.abs()
}

/// `|ρ - (ξ·ω + s/2 - X²/(2s))| / max(ρ, 1)`: the decomposition behind
/// [`jacobian_fd_error`] against the defining quotient.
pub fn rho_decomposition_error(sample: &KernelSample) -> f64 {
    let s = gap(sample.xi, sample.tau, sample.omega);
    let x = cross(sample.xi, sample.omega);
    let split = dot(sample.xi, sample.omega) + rho_shifted(s, x);
    (split - sample.rho).abs() / sample.rho.max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRanges {
    /// `|ξ|` drawn log-uniformly from this interval.
    pub xi_norm: [f64; 2],
    /// `τ/|ξ| - 1` drawn log-uniformly from this interval.
    pub tau_excess: [f64; 2],
}

impl Default for ScanRanges {
    fn default() -> Self {
        Self {
            xi_norm: [1e-2, 1e2],
            tau_excess: [1e-8, 1e2],
        }
    }
}

/// Aggregate of a kernel scan. Violations count quotients above
/// `1/2 + tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub samples: usize,
    pub max_quotient: f64,
    pub argmax: Option<KernelSample>,
    pub violations: usize,
    pub max_identity_error: f64,
    pub max_denominator_error: f64,
    pub max_jacobian_fd_error: f64,
    pub max_decomposition_error: f64,
    pub min_jacobian: f64,
    pub min_rho: f64,
    /// Samples rejected by the cross-check or the domain checks.
    pub failures: usize,
}

impl ScanReport {
    fn empty() -> Self {
        Self {
            samples: 0,
            max_quotient: f64::NEG_INFINITY,
            argmax: None,
            violations: 0,
            max_identity_error: 0.0,
            max_denominator_error: 0.0,
            max_jacobian_fd_error: 0.0,
            max_decomposition_error: 0.0,
            min_jacobian: f64::INFINITY,
            min_rho: f64::INFINITY,
            failures: 0,
        }
    }

    fn record(&mut self, xi: [f64; 2], tau: f64, omega: [f64; 2], tolerance: f64, fd_step: f64) {
        self.samples += 1;
        self.max_denominator_error = self
            .max_denominator_error
            .max(denominator_identity_error(xi, tau, omega));
        let Ok(s) = kernel_sample(xi, tau, omega) else {
            self.failures += 1;
            return;
        };
        if s.quotient > self.max_quotient {
            self.max_quotient = s.quotient;
            self.argmax = Some(s);
        }
        if s.quotient > 0.5 + tolerance {
            self.violations += 1;
        }
        self.max_identity_error = self.max_identity_error.max(change_of_variables_error(&s));
        self.max_jacobian_fd_error = self
            .max_jacobian_fd_error
            .max(jacobian_fd_error(&s, fd_step));
        self.max_decomposition_error = self
            .max_decomposition_error
            .max(rho_decomposition_error(&s));
        self.min_jacobian = self.min_jacobian.min(s.drho_dtau);
        self.min_rho = self.min_rho.min(s.rho);
    }

    fn merge(mut self, other: ScanReport) -> ScanReport {
        self.samples += other.samples;
        if other.max_quotient > self.max_quotient {
            self.max_quotient = other.max_quotient;
            self.argmax = other.argmax;
        }
        self.violations += other.violations;
        self.max_identity_error = self.max_identity_error.max(other.max_identity_error);
        self.max_denominator_error = self.max_denominator_error.max(other.max_denominator_error);
        self.max_jacobian_fd_error = self.max_jacobian_fd_error.max(other.max_jacobian_fd_error);
        self.max_decomposition_error = self
            .max_decomposition_error
            .max(other.max_decomposition_error);
        self.min_jacobian = self.min_jacobian.min(other.min_jacobian);
        self.min_rho = self.min_rho.min(other.min_rho);
        self.failures += other.failures;
        self
    }
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;
const CHUNK: usize = 1 << 14;

fn log_uniform<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    let (a, b) = (range[0].ln(), range[1].ln());
    (a + (b - a) * rng.random::<f64>()).exp()
}

fn check_ranges(ranges: &ScanRanges) -> Result<()> {
    for (name, r) in [
        ("xi_norm", ranges.xi_norm),
        ("tau_excess", ranges.tau_excess),
    ] {
        if !(r[0] > 0.0 && r[1] >= r[0] && r[1].is_finite()) {
            return Err(Error::param(name, format!("need 0 < lo ≤ hi, got {r:?}")));
        }
    }
    Ok(())
}

/// Seeded Monte-Carlo scan. Each chunk of samples draws from its own
/// stream, so the result does not depend on the thread schedule.
pub fn monte_carlo_scan(
    samples: usize,
    seed: u64,
    ranges: &ScanRanges,
    tolerance: f64,
) -> Result<ScanReport> {
    check_ranges(ranges)?;
    let chunks = samples.div_ceil(CHUNK);
    let report = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = rng::stream(seed, chunk as u64);
            let mut report = ScanReport::empty();
            let count = CHUNK.min(samples - chunk * CHUNK);
            for _ in 0..count {
                let r = log_uniform(&mut rng, ranges.xi_norm);
                let excess = log_uniform(&mut rng, ranges.tau_excess);
                let a = 2.0 * PI * rng.random::<f64>();
                let b = 2.0 * PI * rng.random::<f64>();
                let xi = [r * a.cos(), r * a.sin()];
                let omega = [b.cos(), b.sin()];
                report.record(xi, r * (1.0 + excess), omega, tolerance, DEFAULT_FD_STEP);
            }
            report
        })
        .reduce(ScanReport::empty, ScanReport::merge);
    Ok(report)
}

/// Deterministic lattice in `(|ξ|, τ/|ξ|, angle(ξ, ω))`, `points` per axis,
/// geometric in the first two.
pub fn lattice_scan(points: usize, ranges: &ScanRanges, tolerance: f64) -> Result<ScanReport> {
    check_ranges(ranges)?;
    if points < 2 {
        return Err(Error::param("points", "need at least two points per axis"));
    }
    let geometric = |range: [f64; 2], i: usize| {
        let s = i as f64 / (points - 1) as f64;
        (range[0].ln() + s * (range[1].ln() - range[0].ln())).exp()
    };
    let report = (0..points)
        .into_par_iter()
        .map(|i| {
            let r = geometric(ranges.xi_norm, i);
            let mut report = ScanReport::empty();
            for j in 0..points {
                let tau = r * (1.0 + geometric(ranges.tau_excess, j));
                for k in 0..points {
                    let theta = 2.0 * PI * k as f64 / points as f64;
                    report.record(
                        [r, 0.0],
                        tau,
                        [theta.cos(), theta.sin()],
                        tolerance,
                        DEFAULT_FD_STEP,
                    );
                }
            }
            report
        })
        .reduce(ScanReport::empty, ScanReport::merge);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn hand_values_of_rho() {
        let up = [0.0, 1.0];
        assert_eq!(rho_of([1.0, 0.0], 1.0, up).unwrap(), 0.0);
        assert_eq!(rho_of([0.0, 0.0], 2.0, [0.6, 0.8]).unwrap(), 1.0);
        let rho = rho_of([1.0, 0.0], 2.0, up).unwrap();
        assert!((rho - 0.75).abs() < 1e-15);
        assert!(((1.0f64).hypot(-0.75) + 0.75 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            rho_of([1.0, 0.0], 0.5, [0.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            rho_of([1.0, 0.0], 1.0, [1.0, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(jacobian([1.0, 0.0], 1.0, [0.0, 1.0]).is_err());
        assert!(rho_of([1.0, 0.0], 2.0, [1.0, 1.0]).is_err());
    }

    #[test]
    fn hand_values_of_jacobian_and_quotient() {
        assert!((jacobian([0.0, 0.0], 2.0, [1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        let (xi, tau) = ([1.0, 0.0], 2.0);
        let perp = jacobian(xi, tau, [0.0, 1.0]).unwrap();
        assert!((perp - (tau * tau + 1.0) / (2.0 * tau * tau)).abs() < 1e-15);
        assert!((kernel_quotient(xi, tau, [0.0, 1.0]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(kernel_quotient(xi, tau, [1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn supremum_is_approached() {
        // ω nearly parallel to ξ, τ → |ξ|: the quotient tends to ½.
        let eps: f64 = 1e-6;
        let omega = [eps.cos(), eps.sin()];
        let q = kernel_quotient([1.0, 0.0], 1.0 + 1e-14, omega).unwrap();
        assert!(q > 0.49 && q <= 0.5);
    }

    #[test]
    fn scans_are_seeded_and_clean() {
        let ranges = ScanRanges::default();
        let a = monte_carlo_scan(20_000, 3, &ranges, 1e-12).unwrap();
        let b = monte_carlo_scan(20_000, 3, &ranges, 1e-12).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 20_000);
        assert_eq!(a.violations, 0);
        assert_eq!(a.failures, 0);
        assert!(a.max_quotient <= 0.5);
        let lattice = lattice_scan(12, &ranges, 1e-12).unwrap();
        assert_eq!(lattice.samples, 12 * 12 * 12);
        assert_eq!(lattice.violations, 0);
    }

    proptest! {
        #[test]
        fn kernel_invariants(
            r in 1e-2f64..1e2,
            excess in 1e-6f64..1e2,
            a in 0.0f64..(2.0 * PI),
            b in 0.0f64..(2.0 * PI),
        ) {
            let xi = [r * a.cos(), r * a.sin()];
            let omega = [b.cos(), b.sin()];
            let s = kernel_sample(xi, r * (1.0 + excess), omega).unwrap();
            prop_assert!(s.rho >= 0.0);
            prop_assert!(s.drho_dtau > 0.0);
            prop_assert!(s.quotient <= 0.5);
            prop_assert!(change_of_variables_error(&s) <= 1e-10);
            prop_assert!(denominator_identity_error(xi, s.tau, omega) <= 1e-12);
            prop_assert!(jacobian_fd_error(&s, DEFAULT_FD_STEP) <= 1e-6);
            prop_assert!(rho_decomposition_error(&s) <= 1e-12);
        }
    }
}
