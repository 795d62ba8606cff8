use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::coords::{rho_of_sigma_unchecked, sigma_of_rho_unchecked};
use super::polar::PolarGrid;
use crate::error::{Error, Result};

/// Radial variable in which the profile is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parametrization {
    Rho,
    Sigma,
}

impl Parametrization {
    /// `ρ` at radial coordinate `r`.
    pub fn rho(self, r: f64) -> f64 {
        match self {
            Parametrization::Rho => r,
            Parametrization::Sigma => rho_of_sigma_unchecked(r),
        }
    }

    /// Radial coordinate at `ρ`.
    pub fn coordinate(self, rho: f64) -> f64 {
        match self {
            Parametrization::Rho => rho,
            Parametrization::Sigma => sigma_of_rho_unchecked(rho),
        }
    }
}

/// Relative tolerance for the single-valued pole.
pub const POLE_TOLERANCE: f64 = 1e-10;

/// `v: 𝔻 → ℝ³` sampled on a polar grid, ring by ring (`θ` fast).
#[derive(Clone, Debug)]
pub struct SelfSimilarProfile {
    grid: Arc<PolarGrid>,
    parametrization: Parametrization,
    values: Vec<[f64; 3]>,
}

/// First and second derivatives on the grid, in the stored radial variable.
#[derive(Clone, Debug)]
pub struct ProfileDerivatives {
    pub radial: Vec<[f64; 3]>,
    pub radial2: Vec<[f64; 3]>,
    pub theta: Vec<[f64; 3]>,
    pub theta2: Vec<[f64; 3]>,
}

impl SelfSimilarProfile {
    pub fn new(grid: &Arc<PolarGrid>, parametrization: Parametrization, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} polar grid",
                values.len(),
                grid.radial_len(),
                grid.theta_len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("profile has non-finite values".into()));
        }
        let scale = values.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        let pole = values[0];
        for v in &values[..grid.theta_len()] {
            for k in 0..3 {
                if (v[k] - pole[k]).abs() > POLE_TOLERANCE * scale {
                    return Err(Error::Domain("profile is not single-valued at the pole".into()));
                }
            }
        }
        Ok(Self {
            grid: grid.clone(),
            parametrization,
            values,
        })
    }

    /// Samples `f(r, θ)` with `r` the radial coordinate of `parametrization`;
    /// the pole ring takes `f(0, 0)`.
    pub fn from_fn(
        grid: &Arc<PolarGrid>,
        parametrization: Parametrization,
        f: impl Fn(f64, f64) -> [f64; 3],
    ) -> Result<Self> {
        let m = grid.theta_len();
        let pole = f(0.0, 0.0);
        let mut values = Vec::with_capacity(grid.len());
        for (i, &r) in grid.nodes().iter().enumerate() {
            for j in 0..m {
                values.push(if i == 0 { pole } else { f(r, grid.theta(j)) });
            }
        }
        Self::new(grid, parametrization, values)
    }

    pub fn constant(grid: &Arc<PolarGrid>, parametrization: Parametrization, value: [f64; 3]) -> Result<Self> {
        Self::new(grid, parametrization, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> [f64; 3] {
        self.values[i * self.grid.theta_len() + j]
    }

    /// `ρ` at each radial node.
    pub fn rho_nodes(&self) -> Vec<f64> {
        self.grid.nodes().iter().map(|&r| self.parametrization.rho(r)).collect()
    }

    pub fn derivatives(&self) -> ProfileDerivatives {
        let (n, m) = (self.grid.radial_len(), self.grid.theta_len());
        let mut radial = vec![[0.0; 3]; n * m];
        let mut radial2 = vec![[0.0; 3]; n * m];
        let mut column = vec![[0.0; 3]; n];
        for j in 0..m {
            for i in 0..n {
                column[i] = self.values[i * m + j];
            }
            let d1 = self.grid.differentiate_radial(&column);
            let d2 = self.grid.differentiate_radial(&d1);
            for i in 0..n {
                radial[i * m + j] = d1[i];
                radial2[i * m + j] = d2[i];
            }
        }
        let mut theta = vec![[0.0; 3]; n * m];
        let mut theta2 = vec![[0.0; 3]; n * m];
        let mut ring = vec![0.0; m];
        for i in 0..n {
            for k in 0..3 {
                for j in 0..m {
                    ring[j] = self.values[i * m + j][k];
                }
                let d1 = self.grid.differentiate_theta(&ring, 1);
                let d2 = self.grid.differentiate_theta(&ring, 2);
                for j in 0..m {
                    theta[i * m + j][k] = d1[j];
                    theta2[i * m + j][k] = d2[j];
                }
            }
        }
        ProfileDerivatives {
            radial,
            radial2,
            theta,
            theta2,
        }
    }

    /// Interpolant at radial coordinate `r` (of this parametrization) and `θ`.
    pub fn eval(&self, r: f64, theta: f64) -> [f64; 3] {
        let ring = self.ring_at(&self.values, r);
        let mut out = [0.0; 3];
        let mut scalar = vec![0.0; ring.len()];
        for k in 0..3 {
            for (s, v) in scalar.iter_mut().zip(&ring) {
                *s = v[k];
            }
            out[k] = self.grid.interpolate_theta(&scalar, theta);
        }
        out
    }

    /// Radial interpolation of node data to a full ring at `r`.
    pub(crate) fn ring_at(&self, data: &[[f64; 3]], r: f64) -> Vec<[f64; 3]> {
        let (n, m) = (self.grid.radial_len(), self.grid.theta_len());
        let mut column = vec![[0.0; 3]; n];
        (0..m)
            .map(|j| {
                for i in 0..n {
                    column[i] = data[i * m + j];
                }
                self.grid.interpolate(&column, r)
            })
            .collect()
    }

    /// Resamples on the same grid shape in the other radial variable.
    pub fn reparametrize(&self, target: Parametrization) -> Result<Self> {
        if target == self.parametrization {
            return Ok(self.clone());
        }
        let m = self.grid.theta_len();
        let mut values = Vec::with_capacity(self.grid.len());
        for &r in self.grid.nodes() {
            let source = self.parametrization.coordinate(target.rho(r));
            values.extend(self.ring_at(&self.values, source));
        }
        let pole = values[0];
        for v in &mut values[1..m] {
            *v = pole;
        }
        Self::new(&self.grid, target, values)
    }

    /// Mean over the outer ring `ρ = 1`.
    pub fn boundary_average(&self) -> [f64; 3] {
        let m = self.grid.theta_len();
        let ring = &self.values[self.values.len() - m..];
        let mut out = [0.0; 3];
        for v in ring {
            for k in 0..3 {
                out[k] += v[k] / m as f64;
            }
        }
        out
    }

    pub fn shifted(&self, offset: [f64; 3]) -> Self {
        let values = self
            .values
            .iter()
            .map(|v| [v[0] - offset[0], v[1] - offset[1], v[2] - offset[2]])
            .collect();
        Self {
            grid: self.grid.clone(),
            parametrization: self.parametrization,
            values,
        }
    }

    /// Subtracts the boundary average.
    pub fn normalized(&self) -> Self {
        self.shifted(self.boundary_average())
    }

    /// `‖v - v̄‖` in `L²(dr dθ)`, `v̄` the grid average.
    pub fn oscillation_norm(&self) -> f64 {
        let area = 2.0 * std::f64::consts::PI;
        let mut mean = [0.0; 3];
        for k in 0..3 {
            let comp: Vec<f64> = self.values.iter().map(|v| v[k]).collect();
            mean[k] = self.grid.integrate(&comp) / area;
        }
        let sq: Vec<f64> = self
            .values
            .iter()
            .map(|v| (0..3).map(|k| (v[k] - mean[k]).powi(2)).sum())
            .collect();
        self.grid.integrate(&sq).max(0.0).sqrt()
    }

    /// `‖∇_{r,θ} v‖` in `L²(dr dθ)`.
    pub fn gradient_norm(&self) -> f64 {
        let d = self.derivatives();
        gradient_norm_of(&self.grid, &d.radial, &d.theta)
    }
}

pub(crate) fn gradient_norm_of(grid: &PolarGrid, radial: &[[f64; 3]], theta: &[[f64; 3]]) -> f64 {
    let sq: Vec<f64> = radial
        .iter()
        .zip(theta)
        .map(|(a, b)| dot3(*a, *a) + dot3(*b, *b))
        .collect();
    grid.integrate(&sq).max(0.0).sqrt()
}

#[inline]
pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn smooth(rho: f64, theta: f64) -> [f64; 3] {
        [
            rho * theta.cos() + 0.3 * rho * rho,
            rho * rho * (2.0 * theta).sin(),
            (rho * rho).cos() * 0.5 + 0.1 * rho.powi(3) * (3.0 * theta).cos(),
        ]
    }

    #[test]
    fn pole_must_be_single_valued() {
        let g = PolarGrid::new(16, 8).unwrap();
        let mut values = vec![[0.0; 3]; g.len()];
        values[1] = [1.0, 0.0, 0.0];
        assert!(SelfSimilarProfile::new(&g, Parametrization::Rho, values).is_err());
        assert!(SelfSimilarProfile::new(&g, Parametrization::Rho, vec![[0.0; 3]; 3]).is_err());
        let mut values = vec![[0.0; 3]; g.len()];
        values[40] = [f64::NAN, 0.0, 0.0];
        assert!(SelfSimilarProfile::new(&g, Parametrization::Rho, values).is_err());
    }

    #[test]
    fn derivatives_of_smooth_profile() {
        let g = PolarGrid::new(24, 16).unwrap();
        let v = SelfSimilarProfile::from_fn(&g, Parametrization::Rho, |r, t| [r * r * t.cos(), 0.0, 0.0]).unwrap();
        let d = v.derivatives();
        for i in 0..24 {
            for j in 0..16 {
                let (r, t) = (g.nodes()[i], g.theta(j));
                let k = i * 16 + j;
                assert!((d.radial[k][0] - 2.0 * r * t.cos()).abs() < 1e-11);
                assert!((d.radial2[k][0] - 2.0 * t.cos()).abs() < 1e-9);
                assert!((d.theta[k][0] + r * r * t.sin()).abs() < 1e-13);
                assert!((d.theta2[k][0] + r * r * t.cos()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_analytic_profile() {
        let g = PolarGrid::new(32, 16).unwrap();
        let v = SelfSimilarProfile::from_fn(&g, Parametrization::Rho, smooth).unwrap();
        let (r, t) = (0.37, 1.1);
        let got = v.eval(r, t);
        let want = smooth(r, t);
        for k in 0..3 {
            assert!((got[k] - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_zeroes_boundary_average() {
        let g = PolarGrid::new(16, 8).unwrap();
        let v = SelfSimilarProfile::from_fn(&g, Parametrization::Rho, smooth).unwrap().normalized();
        for a in v.boundary_average() {
            assert!(a.abs() < 1e-14);
        }
        let c = SelfSimilarProfile::constant(&g, Parametrization::Rho, [1.0, 2.0, 3.0]).unwrap();
        assert!(c.oscillation_norm() < 1e-14);
        assert!(c.gradient_norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn coordinate_chain_round_trip(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
            let g = PolarGrid::new(48, 16).unwrap();
            let f = |r: f64, t: f64| {
                [a * r * t.cos() + b * r * r, c * r.powi(3) * (2.0 * t).sin(), a * b * r * r * t.sin() + c]
            };
            let v = SelfSimilarProfile::from_fn(&g, Parametrization::Rho, f).unwrap();
            let there = v.reparametrize(Parametrization::Sigma).unwrap();
            for (i, &s) in g.nodes().iter().enumerate() {
                let want = f(rho_of_sigma_unchecked(s), g.theta(3));
                let got = there.value(i, 3);
                for k in 0..3 {
                    prop_assert!((got[k] - want[k]).abs() <= 1e-10);
                }
            }
            let back = there.reparametrize(Parametrization::Rho).unwrap();
            for (x, y) in back.values().iter().zip(v.values()) {
                for k in 0..3 {
                    prop_assert!((x[k] - y[k]).abs() <= 1e-10);
                }
            }
        }
    }
}
