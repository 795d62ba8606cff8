use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::polar::PolarGrid;
use super::profile::{Parametrization, SelfSimilarProfile};
use crate::error::{Error, Result};

/// `ρ^m T_j(2ρ² − 1) cos mθ` or `… sin mθ`; smooth on the disc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisFunction {
    pub m: u32,
    pub j: u32,
    pub sine: bool,
}

impl BasisFunction {
    fn radial(&self, rho: f64) -> f64 {
        rho.powi(self.m as i32) * chebyshev(self.j, 2.0 * rho * rho - 1.0)
    }

    fn angular(&self, theta: f64) -> (f64, f64) {
        let (s, c) = (self.m as f64 * theta).sin_cos();
        let m = self.m as f64;
        if self.sine { (s, m * c) } else { (c, -m * s) }
    }

    pub fn eval(&self, rho: f64, theta: f64) -> f64 {
        self.radial(rho) * self.angular(theta).0
    }
}

fn chebyshev(j: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    match j {
        0 => a,
        _ => {
            for _ in 1..j {
                (a, b) = (b, 2.0 * x * b - a);
            }
            b
        }
    }
}

/// Nonconstant basis with angular orders `0..=max_m` and radial orders
/// `0..radial_terms`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalBasis {
    pub max_m: u32,
    pub radial_terms: u32,
    pub functions: Vec<BasisFunction>,
}

impl ModalBasis {
    pub fn new(max_m: u32, radial_terms: u32) -> Result<Self> {
        if radial_terms == 0 || max_m > 64 || radial_terms > 64 {
            return Err(Error::param("basis", "need 1 ≤ radial_terms ≤ 64 and max_m ≤ 64"));
        }
        let mut functions = Vec::new();
        for m in 0..=max_m {
            for j in 0..radial_terms {
                for sine in [false, true] {
                    if (m == 0 && sine) || (m == 0 && j == 0) {
                        continue;
                    }
                    functions.push(BasisFunction { m, j, sine });
                }
            }
        }
        Ok(Self {
            max_m,
            radial_terms,
            functions,
        })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Highest polynomial degree in `ρ`.
    pub fn degree(&self) -> u32 {
        self.max_m + 2 * (self.radial_terms - 1)
    }

    /// Coefficients are component-major: `coefficients[q * len + k]`.
    pub fn eval(&self, coefficients: &[f64], rho: f64, theta: f64) -> [f64; 3] {
        let p = self.len();
        let mut out = [0.0; 3];
        for (k, f) in self.functions.iter().enumerate() {
            let phi = f.eval(rho, theta);
            for (q, o) in out.iter_mut().enumerate() {
                *o += coefficients[q * p + k] * phi;
            }
        }
        out
    }

    pub fn profile(&self, grid: &Arc<PolarGrid>, coefficients: &[f64]) -> Result<SelfSimilarProfile> {
        if coefficients.len() != 3 * self.len() {
            return Err(Error::param(
                "coefficients",
                format!("expected {}, got {}", 3 * self.len(), coefficients.len()),
            ));
        }
        SelfSimilarProfile::from_fn(grid, Parametrization::Rho, |r, t| self.eval(coefficients, r, t))
    }

    /// Values, radial derivatives and `θ`-derivatives of every basis function
    /// on the grid.
    pub(crate) fn tabulate(&self, grid: &PolarGrid) -> Tabulated {
        let (n, m) = (grid.radial_len(), grid.theta_len());
        let count = self.len();
        let mut values = vec![0.0; count * n * m];
        let mut radial = vec![0.0; count * n * m];
        let mut radial2 = vec![0.0; count * n * m];
        let mut theta = vec![0.0; count * n * m];
        for (k, f) in self.functions.iter().enumerate() {
            let r: Vec<f64> = grid.nodes().iter().map(|&x| f.radial(x)).collect();
            let dr = grid.differentiate_radial(&r);
            let drr = grid.differentiate_radial(&dr);
            let base = k * n * m;
            for i in 0..n {
                for j in 0..m {
                    let (a, da) = f.angular(grid.theta(j));
                    let idx = base + i * m + j;
                    values[idx] = r[i] * a;
                    radial[idx] = dr[i] * a;
                    radial2[idx] = drr[i] * a;
                    theta[idx] = r[i] * da;
                }
            }
        }
        Tabulated {
            points: n * m,
            values,
            radial,
            radial2,
            theta,
            orders: self.functions.iter().map(|f| f.m as f64).collect(),
        }
    }
}

pub(crate) struct Tabulated {
    pub points: usize,
    pub values: Vec<f64>,
    pub radial: Vec<f64>,
    pub radial2: Vec<f64>,
    pub theta: Vec<f64>,
    pub orders: Vec<f64>,
}

impl Tabulated {
    pub fn slice<'a>(&self, data: &'a [f64], k: usize) -> &'a [f64] {
        &data[k * self.points..(k + 1) * self.points]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_excludes_constant_and_counts() {
        let b = ModalBasis::new(4, 5).unwrap();
        // m = 0: j = 1..5 (4); m = 1..4: 5 radial × 2 trig (40)
        assert_eq!(b.len(), 44);
        assert_eq!(b.degree(), 12);
        assert!(!b.functions.contains(&BasisFunction { m: 0, j: 0, sine: false }));
        assert!(ModalBasis::new(2, 0).is_err());
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev(0, 0.3), 1.0);
        assert_eq!(chebyshev(1, 0.3), 0.3);
        let x: f64 = 0.3;
        assert!((chebyshev(4, x) - (8.0 * x.powi(4) - 8.0 * x * x + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn tabulated_derivatives_match_profile() {
        let g = PolarGrid::new(24, 16).unwrap();
        let b = ModalBasis::new(3, 3).unwrap();
        let coefficients: Vec<f64> = (0..3 * b.len()).map(|i| ((i * 7 % 11) as f64 - 5.0) / 10.0).collect();
        let v = b.profile(&g, &coefficients).unwrap();
        let d = v.derivatives();
        let t = b.tabulate(&g);
        for idx in [0, 37, 200, 383] {
            for q in 0..3 {
                let mut r = 0.0;
                let mut th = 0.0;
                for k in 0..b.len() {
                    r += coefficients[q * b.len() + k] * t.slice(&t.radial, k)[idx];
                    th += coefficients[q * b.len() + k] * t.slice(&t.theta, k)[idx];
                }
                assert!((r - d.radial[idx][q]).abs() < 1e-10);
                assert!((th - d.theta[idx][q]).abs() < 1e-10);
            }
        }
    }
}
