//! Space-time transforms use the synthesis convention
//! `P(t, x) = ∫∫ P̃(ξ, τ) e^{i(ξ·x + tτ)} dξ dτ`, and spatial profiles
//! `f(x) = ∫ f̂(ξ) e^{iξ·x} dξ`. Then `φ̃₊ = f̂/|ξ| δ(τ - |ξ|)` and
//! `(φ₊ψ₊)~` is exactly the density returned by [`convolution_density`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::spectral::Grid;

use super::kernel::rho_raw;

pub const DEFAULT_CIRCLE_NODES: usize = 512;

/// One Gaussian bump `a e^{-|ξ-c|²/(2w²)}` in frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: [f64; 2],
    pub width: f64,
    /// Complex amplitude as `[re, im]`.
    pub amplitude: [f64; 2],
}

/// Frequency profile of a real function: each bump is paired with its
/// conjugate reflection `ā e^{-|ξ+c|²/(2w²)}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub bumps: Vec<GaussianBump>,
}

/// Ranges for random profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFamily {
    pub center_norm: [f64; 2],
    pub width: [f64; 2],
    pub bumps: usize,
}

impl Default for ProfileFamily {
    fn default() -> Self {
        Self {
            center_norm: [0.75, 1.25],
            width: [0.15, 0.25],
            bumps: 2,
        }
    }
}

impl ProfileFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = |r: [f64; 2]| r[0] > 0.0 && r[1] >= r[0] && r[1].is_finite();
        if !ok(self.center_norm) {
            return Err(Error::param(
                "center_norm",
                format!("invalid range {:?}", self.center_norm),
            ));
        }
        if !ok(self.width) {
            return Err(Error::param(
                "width",
                format!("invalid range {:?}", self.width),
            ));
        }
        if self.bumps == 0 {
            return Err(Error::param("bumps", "need at least one bump"));
        }
        Ok(())
    }

    /// Largest `|ξ|` carrying more than `e^{-8}` of a bump's peak.
    pub fn frequency_reach(&self) -> f64 {
        self.center_norm[1] + 4.0 * self.width[1]
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> SpectralProfile {
        let bumps = (0..self.bumps)
            .map(|_| {
                let r = self.center_norm[0]
                    + (self.center_norm[1] - self.center_norm[0]) * rng.random::<f64>();
                let a = 2.0 * PI * rng.random::<f64>();
                let width = self.width[0] + (self.width[1] - self.width[0]) * rng.random::<f64>();
                let phase = 2.0 * PI * rng.random::<f64>();
                let size = 0.5 + rng.random::<f64>();
                GaussianBump {
                    center: [r * a.cos(), r * a.sin()],
                    width,
                    amplitude: [size * phase.cos(), size * phase.sin()],
                }
            })
            .collect();
        SpectralProfile { bumps }
    }
}

impl SpectralProfile {
    pub fn single(center: [f64; 2], width: f64) -> Self {
        Self {
            bumps: vec![GaussianBump {
                center,
                width,
                amplitude: [1.0, 0.0],
            }],
        }
    }

    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for b in &self.bumps {
            let a = Complex64::new(b.amplitude[0], b.amplitude[1]);
            let g = |sign: f64| {
                let d0 = xi[0] - sign * b.center[0];
                let d1 = xi[1] - sign * b.center[1];
                (-(d0 * d0 + d1 * d1) / (2.0 * b.width * b.width)).exp()
            };
            out += a * g(1.0) + a.conj() * g(-1.0);
        }
        out
    }

    /// Fourier-series coefficients on the grid, `(2π/L)² f̂(ξ_k)`, restricted
    /// to the quarter band `|k| < n/4` per axis and with the zero mode removed.
    pub fn on_grid(&self, grid: &Grid) -> Vec<Complex64> {
        let scale = (2.0 * PI / grid.box_length()).powi(2);
        (0..grid.len())
            .map(|idx| {
                if idx == 0 || !in_quarter_band(grid, idx) {
                    Complex64::new(0.0, 0.0)
                } else {
                    let (a, b) = grid.xi(idx);
                    self.eval([a, b]) * scale
                }
            })
            .collect()
    }
}

/// Whether both signed modes of `idx` satisfy `4|k| < n`, so products of
/// two such fields are represented without aliasing.
pub fn in_quarter_band(grid: &Grid, idx: usize) -> bool {
    let n = grid.n() as i64;
    let kx = grid.mode(idx % grid.n());
    let ky = grid.mode(idx / grid.n());
    4 * kx.abs() < n && 4 * ky.abs() < n
}

/// `2χ_{τ>|ξ|}/(τ² - |ξ|²) ∫_{S¹} f̂(ξ - ρω) ĝ(ρω) ρ dω`, by the periodic
/// trapezoid rule with `nodes` points.
pub fn convolution_density(
    f: &SpectralProfile,
    g: &SpectralProfile,
    xi: [f64; 2],
    tau: f64,
    nodes: usize,
) -> Result<Complex64> {
    if nodes < 3 {
        return Err(Error::param(
            "nodes",
            "need at least three quadrature nodes",
        ));
    }
    if !(tau.is_finite() && xi.iter().all(|v| v.is_finite())) {
        return Err(Error::Domain("non-finite arguments".into()));
    }
    let r = xi[0].hypot(xi[1]);
    if tau <= r {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let dtheta = 2.0 * PI / nodes as f64;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for j in 0..nodes {
        let theta = j as f64 * dtheta;
        let omega = [theta.cos(), theta.sin()];
        let rho = rho_raw(xi, tau, omega);
        let value = f.eval([xi[0] - rho * omega[0], xi[1] - rho * omega[1]])
            * g.eval([rho * omega[0], rho * omega[1]])
            * rho;
        re.add(value.re);
        im.add(value.im);
    }
    let cone = (tau - r) * (tau + r);
    Ok(Complex64::new(re.total(), im.total()) * (2.0 * dtheta / cone))
}

/// Gaussian time window `w(t) = e^{-t²/(2T²)}` and its transform
/// `ŵ(σ) = ∫ w(t) e^{-itσ} dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianWindow {
    pub width: f64,
}

impl GaussianWindow {
    pub fn eval(&self, t: f64) -> f64 {
        (-t * t / (2.0 * self.width * self.width)).exp()
    }

    pub fn transform(&self, sigma: f64) -> f64 {
        self.width * (2.0 * PI).sqrt() * (-0.5 * (self.width * sigma).powi(2)).exp()
    }
}

/// `∫ K(ξ, τ') ŵ(τ - τ') dτ'` with `K` the convolution density, by
/// the substitution `τ' = |ξ| + s²` and the trapezoid rule in `s`.
pub fn windowed_density(
    f: &SpectralProfile,
    g: &SpectralProfile,
    xi: [f64; 2],
    tau: f64,
    window: GaussianWindow,
    tau_max: f64,
    steps: usize,
) -> Result<Complex64> {
    let r = xi[0].hypot(xi[1]);
    if !(tau_max > r) || steps < 2 {
        return Err(Error::param(
            "tau_max",
            "must exceed |ξ| with at least two steps",
        ));
    }
    let s_max = (tau_max - r).sqrt();
    let ds = s_max / steps as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 1..=steps {
        let s = j as f64 * ds;
        let tp = r + s * s;
        let weight = if j == steps { 0.5 } else { 1.0 };
        let k = convolution_density(f, g, xi, tp, DEFAULT_CIRCLE_NODES)?;
        acc += k * (2.0 * s * window.transform(tau - tp) * weight);
    }
    Ok(acc * ds)
}

/// Grid counterpart of [`windowed_density`]: evolves `φ₊ψ₊` on the
/// periodic grid for `|t| ≤ t_max` and returns, for each requested
/// `(mode index, τ)`, `(L/2π)² ∫ w(t) P̂_k(t) e^{-itτ} dt`.
pub fn windowed_product_transform(
    grid: &Arc<Grid>,
    f: &SpectralProfile,
    g: &SpectralProfile,
    targets: &[(usize, f64)],
    window: GaussianWindow,
    t_max: f64,
    dt: f64,
) -> Result<Vec<Complex64>> {
    if !(dt > 0.0 && t_max > 0.0) {
        return Err(Error::param("dt", "time step and range must be positive"));
    }
    for &(idx, _) in targets {
        if idx >= grid.len() {
            return Err(Error::param(
                "targets",
                format!("mode index {idx} outside the grid"),
            ));
        }
    }
    let fh = f.on_grid(grid);
    let gh = g.on_grid(grid);
    let omega: Vec<f64> = (0..grid.len()).map(|i| grid.xi_norm(i)).collect();
    let steps = (t_max / dt).ceil() as i64;
    let h = t_max / steps as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); targets.len()];
    let n = grid.n();
    let kernels: Vec<Vec<Complex64>> = targets
        .iter()
        .map(|&(idx, _)| {
            let (kx, ky) = grid.xi(idx);
            (0..grid.len())
                .map(|p| {
                    Complex64::from_polar(
                        1.0,
                        -(kx * grid.coordinate(p % n) + ky * grid.coordinate(p / n)),
                    )
                })
                .collect()
        })
        .collect();
    let mut a = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut b = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in -steps..=steps {
        let t = j as f64 * h;
        for idx in 0..grid.len() {
            if omega[idx] == 0.0 {
                a[idx] = Complex64::new(0.0, 0.0);
                b[idx] = Complex64::new(0.0, 0.0);
            } else {
                let phase = Complex64::from_polar(1.0 / omega[idx], t * omega[idx]);
                a[idx] = fh[idx] * phase;
                b[idx] = gh[idx] * phase;
            }
        }
        grid.inverse(&mut a);
        grid.inverse(&mut b);
        let weight = window.eval(t) * if j.abs() == steps { 0.5 } else { 1.0 };
        for ((slot, &(_, tau)), kernel) in out.iter_mut().zip(targets).zip(&kernels) {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..grid.len() {
                acc += a[p] * b[p] * kernel[p];
            }
            acc /= grid.len() as f64;
            *slot += acc * Complex64::from_polar(weight, -t * tau);
        }
    }
    let scale = (grid.box_length() / (2.0 * PI)).powi(2) * h;
    Ok(out.into_iter().map(|v| v * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_below_the_cone() {
        let f = SpectralProfile::single([1.0, 0.0], 0.3);
        let v = convolution_density(&f, &f, [1.0, 0.5], 1.0, 64).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn radial_profiles_give_rotation_invariant_density() {
        let f = SpectralProfile {
            bumps: vec![GaussianBump {
                center: [0.0, 0.0],
                width: 0.7,
                amplitude: [0.5, 0.0],
            }],
        };
        let g = SpectralProfile {
            bumps: vec![GaussianBump {
                center: [0.0, 0.0],
                width: 0.4,
                amplitude: [0.5, 0.0],
            }],
        };
        let base = convolution_density(&f, &g, [0.8, 0.0], 1.7, DEFAULT_CIRCLE_NODES).unwrap();
        for angle in [0.3f64, 1.0, 2.5, 4.0] {
            let xi = [0.8 * angle.cos(), 0.8 * angle.sin()];
            let v = convolution_density(&f, &g, xi, 1.7, DEFAULT_CIRCLE_NODES).unwrap();
            assert!((v - base).norm() <= 1e-12 * base.norm());
        }
    }

    #[test]
    fn profile_is_hermitian() {
        let mut rng = crate::rng::stream(1, 0);
        let p = ProfileFamily::default().sample(&mut rng);
        let xi = [0.4, -0.9];
        assert!((p.eval(xi) - p.eval([-0.4, 0.9]).conj()).norm() < 1e-15);
    }
}
