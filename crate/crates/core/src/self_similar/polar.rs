//! Polar grid: Chebyshev–Lobatto nodes on `[0, 1]` in the radial variable,
//! uniform nodes in `θ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fewest radial nodes accepted by the residual.
pub const MIN_RADIAL_NODES: usize = 16;
pub const MIN_THETA_NODES: usize = 4;
pub const MAX_NODES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarShape {
    pub radial: usize,
    pub theta: usize,
}

pub struct PolarGrid {
    shape: PolarShape,
    nodes: Vec<f64>,
    bary: Vec<f64>,
    diff: Vec<f64>,
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PolarGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolarGrid").field("shape", &self.shape).finish()
    }
}

impl PartialEq for PolarGrid {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape
    }
}

impl PolarGrid {
    pub fn new(radial: usize, theta: usize) -> Result<Arc<Self>> {
        if !(2..=MAX_NODES).contains(&radial) {
            return Err(Error::InvalidGrid(format!("radial nodes {radial} outside [2, {MAX_NODES}]")));
        }
        if !(MIN_THETA_NODES..=MAX_NODES).contains(&theta) || !theta.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "theta nodes must be even and in [{MIN_THETA_NODES}, {MAX_NODES}], got {theta}"
            )));
        }
        let n = radial - 1;
        let angle = |k: usize| PI * k as f64 / n as f64;
        // r_k = (1 - cos(πk/n))/2 = sin²(πk/2n)
        let nodes: Vec<f64> = (0..radial).map(|k| (0.5 * angle(k)).sin().powi(2)).collect();
        let bary: Vec<f64> = (0..radial)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                if k == 0 || k == n { 0.5 * s } else { s }
            })
            .collect();
        let mut diff = vec![0.0; radial * radial];
        for i in 0..radial {
            let mut row = 0.0;
            for j in 0..radial {
                if i == j {
                    continue;
                }
                // r_i - r_j = sin((a_i + a_j)/2) sin((a_i - a_j)/2), a_k = πk/n
                let gap = (0.5 * (angle(i) + angle(j))).sin() * (0.5 * (angle(i) - angle(j))).sin();
                let d = bary[j] / bary[i] / gap;
                diff[i * radial + j] = d;
                row += d;
            }
            diff[i * radial + i] = -row;
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            shape: PolarShape { radial, theta },
            weights: clenshaw_curtis(n),
            nodes,
            bary,
            diff,
            fft: planner.plan_fft_forward(theta),
            ifft: planner.plan_fft_inverse(theta),
        }))
    }

    pub fn shape(&self) -> PolarShape {
        self.shape
    }

    pub fn radial_len(&self) -> usize {
        self.shape.radial
    }

    pub fn theta_len(&self) -> usize {
        self.shape.theta
    }

    pub fn len(&self) -> usize {
        self.shape.radial * self.shape.theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Radial nodes, increasing from 0 to 1.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.shape.theta as f64
    }

    pub fn theta_step(&self) -> f64 {
        2.0 * PI / self.shape.theta as f64
    }

    /// Clenshaw–Curtis weights on `[0, 1]`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row-major radial differentiation matrix.
    pub fn diff_matrix(&self) -> &[f64] {
        &self.diff
    }

    pub fn differentiate_radial<T: Radial>(&self, values: &[T]) -> Vec<T> {
        let n = self.shape.radial;
        (0..n)
            .map(|i| {
                let row = &self.diff[i * n..(i + 1) * n];
                T::combine(row, values)
            })
            .collect()
    }

    /// Barycentric interpolation of node values at `r`.
    pub fn interpolate<T: Radial>(&self, values: &[T], r: f64) -> T {
        if let Some(k) = self.nodes.iter().position(|&x| x == r) {
            return values[k];
        }
        let mut coefficients: Vec<f64> = self.nodes.iter().zip(&self.bary).map(|(&x, &w)| w / (r - x)).collect();
        let total: f64 = coefficients.iter().sum();
        for c in &mut coefficients {
            *c /= total;
        }
        T::combine(&coefficients, values)
    }

    /// `order`-th `θ`-derivative of one ring, spectrally. The Nyquist mode is
    /// dropped for odd orders.
    pub fn differentiate_theta(&self, ring: &[f64], order: u32) -> Vec<f64> {
        let m = self.shape.theta;
        let mut buf: Vec<Complex64> = ring.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            let freq = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            if k == m / 2 && order % 2 == 1 {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            *c *= Complex64::new(0.0, freq).powu(order);
        }
        self.ifft.process(&mut buf);
        buf.iter().map(|c| c.re / m as f64).collect()
    }

    /// Trigonometric interpolant of one ring at `theta`.
    pub fn interpolate_theta(&self, ring: &[f64], theta: f64) -> f64 {
        let m = self.shape.theta;
        let mut buf: Vec<Complex64> = ring.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        let mut total = buf[0].re;
        for (k, c) in buf.iter().enumerate().take(m / 2).skip(1) {
            total += 2.0 * (c * Complex64::from_polar(1.0, k as f64 * theta)).re;
        }
        total += buf[m / 2].re * (0.5 * m as f64 * theta).cos();
        total / m as f64
    }

    /// `∫₀¹∫₀^{2π} f dθ dr` of node values stored ring by ring.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let m = self.shape.theta;
        let h = self.theta_step();
        crate::numeric::compensated_sum(
            values
                .chunks_exact(m)
                .zip(&self.weights)
                .map(|(ring, w)| w * h * crate::numeric::compensated_sum(ring.iter().copied())),
        )
    }
}

/// Values that can be combined linearly with real weights.
pub trait Radial: Copy {
    fn combine(weights: &[f64], values: &[Self]) -> Self;
}

impl Radial for f64 {
    fn combine(weights: &[f64], values: &[f64]) -> f64 {
        weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

impl Radial for [f64; 3] {
    fn combine(weights: &[f64], values: &[[f64; 3]]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (w, v) in weights.iter().zip(values) {
            for k in 0..3 {
                out[k] += w * v[k];
            }
        }
        out
    }
}

/// Clenshaw–Curtis weights for `n + 1` Lobatto nodes, mapped to `[0, 1]`.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if n == 1 {
        return vec![0.5, 0.5];
    }
    let nf = n as f64;
    let mut interior = vec![1.0; n - 1];
    let end = if n.is_multiple_of(2) {
        for (i, v) in interior.iter_mut().enumerate() {
            let theta = PI * (i + 1) as f64 / nf;
            for k in 1..n / 2 {
                let kf = k as f64;
                *v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            *v -= (nf * theta).cos() / (nf * nf - 1.0);
        }
        1.0 / (nf * nf - 1.0)
    } else {
        for (i, v) in interior.iter_mut().enumerate() {
            let theta = PI * (i + 1) as f64 / nf;
            for k in 1..=(n - 1) / 2 {
                let kf = k as f64;
                *v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        1.0 / (nf * nf)
    };
    w[0] = 0.5 * end;
    w[n] = 0.5 * end;
    for (i, v) in interior.into_iter().enumerate() {
        w[i + 1] = v / nf;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights() {
        let g = PolarGrid::new(17, 8).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[16], 1.0);
        assert!((g.nodes()[8] - 0.5).abs() < 1e-15);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        let total: f64 = g.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        // exact for polynomials of degree ≤ n
        let moment: f64 = g.weights().iter().zip(g.nodes()).map(|(w, r)| w * r.powi(9)).sum();
        assert!((moment - 0.1).abs() < 1e-14);
        let g = PolarGrid::new(16, 8).unwrap();
        let moment: f64 = g.weights().iter().zip(g.nodes()).map(|(w, r)| w * r.powi(6)).sum();
        assert!((moment - 1.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn radial_derivative_is_exact_on_polynomials() {
        let g = PolarGrid::new(24, 8).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| r.powi(7) - 3.0 * r * r + 1.0).collect();
        let df = g.differentiate_radial(&f);
        for (r, d) in g.nodes().iter().zip(&df) {
            assert!((d - (7.0 * r.powi(6) - 6.0 * r)).abs() < 1e-11);
        }
        assert!((g.interpolate(&f, 0.3) - (0.3f64.powi(7) - 0.27 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn theta_derivatives() {
        let g = PolarGrid::new(4, 16).unwrap();
        let ring: Vec<f64> = (0..16).map(|j| (3.0 * g.theta(j)).sin() + (2.0 * g.theta(j)).cos()).collect();
        let d1 = g.differentiate_theta(&ring, 1);
        let d2 = g.differentiate_theta(&ring, 2);
        for j in 0..16 {
            let t = g.theta(j);
            assert!((d1[j] - (3.0 * (3.0 * t).cos() - 2.0 * (2.0 * t).sin())).abs() < 1e-13);
            assert!((d2[j] + 9.0 * (3.0 * t).sin() + 4.0 * (2.0 * t).cos()).abs() < 1e-12);
        }
        let at = g.interpolate_theta(&ring, 0.4);
        assert!((at - ((1.2f64).sin() + (0.8f64).cos())).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(PolarGrid::new(1, 8).is_err());
        assert!(PolarGrid::new(16, 7).is_err());
        assert!(PolarGrid::new(16, 2).is_err());
    }
}
