use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectral::{sobolev_norm_sq, Grid, ScalarField, VectorField};

/// Cauchy data `(u₀, u₁)`, projected to mean zero; the removed means are
/// kept for the affine evolution of the zero mode.
#[derive(Clone, Debug)]
pub struct CauchyData {
    u0: VectorField,
    u1: VectorField,
    mean0: [f64; 3],
    mean1: [f64; 3],
    size_bound: f64,
}

impl CauchyData {
    pub fn new(u0: VectorField, u1: VectorField) -> Result<Self> {
        crate::spectral::ensure_same_grid(u0.grid(), u1.grid())?;
        let (u0, mean0) = project_mean(&u0);
        let (u1, mean1) = project_mean(&u1);
        let mut data = Self {
            u0,
            u1,
            mean0,
            mean1,
            size_bound: 0.0,
        };
        data.size_bound = data.norm();
        Ok(data)
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            u0: VectorField::zeros(grid),
            u1: VectorField::zeros(grid),
            mean0: [0.0; 3],
            mean1: [0.0; 3],
            size_bound: 0.0,
        }
    }

    pub fn from_spec(spec: &DataSpec, grid: &Arc<Grid>, seed: u64) -> Result<Self> {
        let (u0, u1) = spec.build(grid, seed)?;
        Self::new(u0, u1)
    }

    /// Declares the bound `K`; fails if the data exceed it.
    pub fn with_size_bound(mut self, k: f64) -> Result<Self> {
        let norm = self.norm();
        if !(k >= 0.0) || norm > k * (1.0 + 1e-12) {
            return Err(Error::param(
                "K",
                format!("data norm {norm:e} exceeds bound {k:e}"),
            ));
        }
        self.size_bound = k;
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u0.grid()
    }

    pub fn u0(&self) -> &VectorField {
        &self.u0
    }

    pub fn u1(&self) -> &VectorField {
        &self.u1
    }

    pub fn mean0(&self) -> [f64; 3] {
        self.mean0
    }

    pub fn mean1(&self) -> [f64; 3] {
        self.mean1
    }

    pub fn size_bound(&self) -> f64 {
        self.size_bound
    }

    /// `‖u₀‖_{Ḣ^{3/2}} + ‖u₁‖_{Ḣ^{1/2}}`
    pub fn norm(&self) -> f64 {
        vector_norm(&self.u0, 1.5) + vector_norm(&self.u1, 0.5)
    }

    /// Rescales both fields (and means) so that `norm() == target`.
    pub fn normalized_to(&self, target: f64) -> Result<Self> {
        let norm = self.norm();
        if !(target.is_finite() && target >= 0.0) {
            return Err(Error::param(
                "norm",
                format!("target must be nonnegative, got {target}"),
            ));
        }
        if norm == 0.0 {
            return if target == 0.0 {
                Ok(self.clone())
            } else {
                Err(Error::param("norm", "cannot rescale zero data"))
            };
        }
        Ok(self.scaled(target / norm))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self {
            u0: self.u0.scaled(factor),
            u1: self.u1.scaled(factor),
            mean0: self.mean0.map(|m| m * factor),
            mean1: self.mean1.map(|m| m * factor),
            size_bound: 0.0,
        };
        out.size_bound = out.norm();
        out
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, factor: f64, other: &CauchyData) -> Result<Self> {
        let mut out = Self {
            u0: self.u0.add_scaled(factor, &other.u0)?,
            u1: self.u1.add_scaled(factor, &other.u1)?,
            mean0: std::array::from_fn(|c| self.mean0[c] + factor * other.mean0[c]),
            mean1: std::array::from_fn(|c| self.mean1[c] + factor * other.mean1[c]),
            size_bound: 0.0,
        };
        out.size_bound = out.norm();
        Ok(out)
    }
}

fn project_mean(f: &VectorField) -> (VectorField, [f64; 3]) {
    let grid = f.grid().clone();
    let mut coefficients = f.to_spectral().into_coefficients();
    let mean = std::array::from_fn(|c| coefficients[c][0].re);
    for c in coefficients.iter_mut() {
        c[0] = Complex64::new(0.0, 0.0);
    }
    (
        VectorField::from_coefficients_unchecked(&grid, coefficients),
        mean,
    )
}

pub(crate) fn vector_norm(f: &VectorField, s: f64) -> f64 {
    let grid = f.grid();
    f.coefficients()
        .iter()
        .map(|c| sobolev_norm_sq(grid, c, s))
        .sum::<f64>()
        .sqrt()
}

/// Declarative description of initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Zero {},
    /// Gaussian bump `a e^{-|x-x₀|²/(2w²)}` in position and velocity.
    Bump {
        amplitude: [f64; 3],
        #[serde(default)]
        velocity: [f64; 3],
        width: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// Sum of real Fourier modes on the box lattice.
    Modes {
        modes: Vec<ModeSpec>,
    },
    /// Random band-limited data, Gaussian coefficients with envelope
    /// `e^{-|ξ|²/k²}` cut at `|ξ| ≤ 2k`.
    Random {
        wavenumber: f64,
        #[serde(default = "default_true")]
        with_velocity: bool,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub component: usize,
    pub kx: i64,
    pub ky: i64,
    /// Adds `amplitude · cos(ξ·x + phase)` to `u₀`.
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
    /// Adds `velocity · cos(ξ·x + phase)` to `u₁`.
    #[serde(default)]
    pub velocity: f64,
}

impl DataSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: &[f64]| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite"))
            }
        };
        match self {
            DataSpec::Zero {} => Ok(()),
            DataSpec::Bump {
                amplitude,
                velocity,
                width,
                center,
            } => {
                finite("amplitude", amplitude)?;
                finite("velocity", velocity)?;
                finite("center", center)?;
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::param("width", "must be positive"));
                }
                Ok(())
            }
            DataSpec::Modes { modes } => {
                for m in modes {
                    if m.component > 2 {
                        return Err(Error::param(
                            "component",
                            format!("must be 0, 1 or 2, got {}", m.component),
                        ));
                    }
                    finite("amplitude", &[m.amplitude, m.phase, m.velocity])?;
                }
                Ok(())
            }
            DataSpec::Random { wavenumber, .. } => {
                if !(wavenumber.is_finite() && *wavenumber > 0.0) {
                    return Err(Error::param("wavenumber", "must be positive"));
                }
                Ok(())
            }
        }
    }

    pub fn build(&self, grid: &Arc<Grid>, seed: u64) -> Result<(VectorField, VectorField)> {
        self.validate()?;
        match self {
            DataSpec::Zero {} => Ok((VectorField::zeros(grid), VectorField::zeros(grid))),
            DataSpec::Bump {
                amplitude,
                velocity,
                width,
                center,
            } => {
                let profile = |x: f64, y: f64| {
                    let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                    (-r2 / (2.0 * width * width)).exp()
                };
                let u0 = VectorField::from_fn(grid, |x, y| amplitude.map(|a| a * profile(x, y)));
                let u1 = VectorField::from_fn(grid, |x, y| velocity.map(|a| a * profile(x, y)));
                Ok((u0, u1))
            }
            DataSpec::Modes { modes } => {
                let kappa = 2.0 * PI / grid.box_length();
                let eval = |x: f64, y: f64, velocity: bool| {
                    let mut out = [0.0; 3];
                    for m in modes {
                        let phase = kappa * (m.kx as f64 * x + m.ky as f64 * y) + m.phase;
                        let a = if velocity { m.velocity } else { m.amplitude };
                        out[m.component] += a * phase.cos();
                    }
                    out
                };
                Ok((
                    VectorField::from_fn(grid, |x, y| eval(x, y, false)),
                    VectorField::from_fn(grid, |x, y| eval(x, y, true)),
                ))
            }
            DataSpec::Random {
                wavenumber,
                with_velocity,
            } => {
                let mut rng = rng::stream(seed, 0);
                let mut draw = |active: bool| -> Result<VectorField> {
                    let comps: Vec<ScalarField> = (0..3)
                        .map(|_| random_band_limited(grid, *wavenumber, active, &mut rng))
                        .collect::<Result<_>>()?;
                    VectorField::new([comps[0].clone(), comps[1].clone(), comps[2].clone()])
                };
                let u0 = draw(true)?;
                let u1 = draw(*with_velocity)?;
                Ok((u0, u1))
            }
        }
    }
}

fn random_band_limited(
    grid: &Arc<Grid>,
    wavenumber: f64,
    active: bool,
    rng: &mut rng::StreamRng,
) -> Result<ScalarField> {
    let mut coefficients = vec![Complex64::new(0.0, 0.0); grid.len()];
    if active {
        for (idx, c) in coefficients.iter_mut().enumerate() {
            let r = grid.xi_norm(idx);
            let (re, im): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
            if idx != 0 && r <= 2.0 * wavenumber && grid.is_retained(idx) {
                *c = Complex64::new(re, im) * (-(r / wavenumber).powi(2)).exp();
            }
        }
        grid.inverse(&mut coefficients);
        for v in coefficients.iter_mut() {
            *v = Complex64::new(v.re, 0.0);
        }
        grid.forward(&mut coefficients);
    }
    ScalarField::from_spectral(grid, coefficients)
}
