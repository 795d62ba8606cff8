use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Relative size of the zero coefficient below which a field counts as
/// mean-free.
pub const MEAN_FREE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Fourier multiplier `|ξ|^s`, with the zero mode sent to zero for `s ≠ 0`.
pub fn fractional_laplacian(f: &VectorField, s: f64) -> Result<VectorField> {
    let c = f.components();
    VectorField::new([
        fractional_laplacian_scalar(&c[0], s)?,
        fractional_laplacian_scalar(&c[1], s)?,
        fractional_laplacian_scalar(&c[2], s)?,
    ])
}

pub fn fractional_laplacian_scalar(f: &ScalarField, s: f64) -> Result<ScalarField> {
    if s == 0.0 {
        return Ok(f.to_spectral());
    }
    let coefficients = f.coefficients();
    if s < 0.0 {
        ensure_mean_free(&coefficients)?;
    }
    let grid = f.grid();
    let out = coefficients
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            if idx == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c * grid.xi_norm(idx).powf(s)
            }
        })
        .collect();
    Ok(ScalarField::from_coefficients_unchecked(grid, out))
}

/// Homogeneous Sobolev norm `‖(-Δ)^{s/2} f‖_{L²(box)}` with continuum
/// Parseval weighting `L² Σ |ξ|^{2s} |f̂(ξ)|²`.
pub fn sobolev_norm(f: &VectorField, s: f64) -> Result<f64> {
    let mut total = 0.0;
    for c in f.components() {
        total += sobolev_norm_scalar(c, s)?.powi(2);
    }
    Ok(total.sqrt())
}

pub fn sobolev_norm_scalar(f: &ScalarField, s: f64) -> Result<f64> {
    let coefficients = f.coefficients();
    if s < 0.0 {
        ensure_mean_free(&coefficients)?;
    }
    Ok(sobolev_norm_sq(f.grid(), &coefficients, s).sqrt())
}

/// Squared homogeneous norm of raw (possibly non-Hermitian) coefficients.
/// The zero mode counts only when `s == 0`.
pub fn sobolev_norm_sq(grid: &Grid, coefficients: &[Complex64], s: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    if s == 0.0 {
        for c in coefficients {
            acc.add(c.norm_sqr());
        }
    } else {
        for (idx, c) in coefficients.iter().enumerate().skip(1) {
            let m = c.norm_sqr();
            if m != 0.0 {
                acc.add(grid.xi_norm(idx).powf(2.0 * s) * m);
            }
        }
    }
    let area = grid.box_length() * grid.box_length();
    area * acc.total()
}

/// `cos(t√-Δ) f`.
pub fn half_wave_cos(f: &VectorField, t: f64) -> VectorField {
    let grid = f.grid().clone();
    f.map(|c| c.apply_multiplier(|idx| Complex64::new((t * grid.xi_norm(idx)).cos(), 0.0)))
}

/// `sin(t√-Δ)/√-Δ f`, with the zero mode multiplied by `t`.
pub fn half_wave_sinc(f: &VectorField, t: f64) -> VectorField {
    let grid = f.grid().clone();
    f.map(|c| c.apply_multiplier(|idx| Complex64::new(sinc_multiplier(t, grid.xi_norm(idx)), 0.0)))
}

/// `sin(tω)/ω`, continuous at `ω = 0`.
#[inline]
pub fn sinc_multiplier(t: f64, omega: f64) -> f64 {
    if omega == 0.0 {
        t
    } else {
        (t * omega).sin() / omega
    }
}

/// Spectral derivative `iξ_axis`, Nyquist mode along `axis` zeroed.
pub fn partial_derivative(f: &VectorField, axis: Axis) -> VectorField {
    f.map(|c| partial_derivative_scalar(c, axis))
}

pub fn partial_derivative_scalar(f: &ScalarField, axis: Axis) -> ScalarField {
    let grid = f.grid().clone();
    f.apply_multiplier(|idx| derivative_multiplier(&grid, idx, axis))
}

#[inline]
pub(crate) fn derivative_multiplier(grid: &Grid, idx: usize, axis: Axis) -> Complex64 {
    let n = grid.n();
    let i = match axis {
        Axis::X => idx % n,
        Axis::Y => idx / n,
    };
    if grid.is_nyquist(i) {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, grid.wavenumber(i))
    }
}

/// Writes `iξ_axis · input` into `out`.
pub(crate) fn differentiate_into(
    grid: &Grid,
    input: &[Complex64],
    axis: Axis,
    out: &mut [Complex64],
) {
    for (idx, (o, c)) in out.iter_mut().zip(input).enumerate() {
        *o = c * derivative_multiplier(grid, idx, axis);
    }
}

pub(crate) fn ensure_mean_free(coefficients: &[Complex64]) -> Result<()> {
    let mean = coefficients[0].norm();
    if mean == 0.0 {
        return Ok(());
    }
    let largest = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if mean <= MEAN_FREE_TOLERANCE * largest {
        Ok(())
    } else {
        Err(Error::NonInvertibleZeroMode { mean })
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::grid::Grid;

    fn grid() -> std::sync::Arc<Grid> {
        Grid::new(32, 12.0).unwrap()
    }

    fn single_component(grid: &std::sync::Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> VectorField {
        VectorField::from_fn(grid, |x, y| [f(x, y), 0.0, 0.0])
    }

    #[test]
    fn fractional_laplacian_of_order_zero_is_identity() {
        let g = grid();
        let f = VectorField::from_fn(&g, |x, y| [x.sin() + 3.0, (0.5 * y).cos(), 1.0]);
        let out = fractional_laplacian(&f, 0.0).unwrap();
        assert!(out.max_abs_diff(&f).unwrap() < 1e-13);
    }

    #[test]
    fn fractional_laplacian_on_cosine_mode() {
        let g = grid();
        let k = 2.0 * PI / g.box_length();
        // x = -L/2 + ..., the cosine is still a single ±1 mode pair
        let f = single_component(&g, |x, _| (k * x).cos());
        let out = fractional_laplacian(&f, 1.0).unwrap();
        let expected = single_component(&g, |x, _| k * (k * x).cos());
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-13);
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let g = grid();
        let f = VectorField::from_fn(&g, |_, _| [2.0, -1.0, 7.0]);
        let out = fractional_laplacian(&f, 2.0).unwrap();
        assert!(out.max_abs() < 1e-13);
    }

    #[test]
    fn negative_power_requires_mean_free_input() {
        let g = grid();
        let f = VectorField::from_fn(&g, |x, _| [1.0 + x.cos(), 0.0, 0.0]);
        let err = fractional_laplacian(&f, -0.5).unwrap_err();
        assert!(matches!(err, Error::NonInvertibleZeroMode { .. }));
        assert!(sobolev_norm(&f, -1.0).is_err());
        assert!(sobolev_norm(&f, 1.0).is_ok());
    }

    #[test]
    fn sobolev_norm_of_zero_field() {
        let g = grid();
        let f = VectorField::zeros(&g);
        for s in [-1.0, 0.0, 0.5, 1.5] {
            assert_eq!(sobolev_norm(&f, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn sobolev_norm_single_mode() {
        // f = 2 Re(c e^{iξ₀x}) has coefficients c at ±ξ₀; one-term Parseval:
        // ‖f‖²_{Ḣ^s} = L² · 2 |c|² |ξ₀|^{2s}
        let g = grid();
        let k = 3.0 * 2.0 * PI / g.box_length();
        let c = 0.7;
        let f = single_component(&g, |x, _| 2.0 * c * (k * x).cos());
        let expected = (g.box_length().powi(2) * 2.0 * c * c * k).sqrt();
        let measured = sobolev_norm(&f, 0.5).unwrap();
        assert!((measured - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn l2_norm_matches_parseval() {
        let g = grid();
        let f = VectorField::from_fn(&g, |x, y| {
            [(-(x * x + y * y)).exp(), x.sin() * y.cos(), 0.3]
        });
        let spectral = sobolev_norm(&f, 0.0).unwrap();
        let physical = f.l2_norm_physical();
        assert!((spectral - physical).abs() <= 1e-12 * physical);
    }

    #[test]
    fn half_wave_limits() {
        let g = grid();
        let f = VectorField::from_fn(&g, |x, y| [x.cos() * y.sin(), 2.0, (-(x * x)).exp()]);
        assert!(half_wave_cos(&f, 0.0).max_abs_diff(&f).unwrap() < 1e-13);
        assert!(half_wave_sinc(&f, 0.0).max_abs() < 1e-13);

        let constant = VectorField::from_fn(&g, |_, _| [1.5, -2.0, 0.25]);
        let t = 0.8;
        let evolved = half_wave_sinc(&constant, t);
        assert!(evolved.max_abs_diff(&constant.scaled(t)).unwrap() < 1e-13);
    }

    #[test]
    fn cosine_propagator_annihilates_mode_at_quarter_period() {
        let g = grid();
        let k = 2.0 * 2.0 * PI / g.box_length();
        let f = single_component(&g, |x, _| (k * x).sin());
        let t = PI / (2.0 * k);
        assert!(half_wave_cos(&f, t).max_abs() < 1e-13);
    }

    #[test]
    fn sinc_propagator_single_mode_scaling() {
        let g = grid();
        let k = 2.0 * PI / g.box_length();
        let (kx, ky) = (2.0 * k, k);
        let omega = kx.hypot(ky);
        let t = 1.3;
        let f = single_component(&g, |x, y| (kx * x + ky * y).cos());
        let expected = single_component(&g, |x, y| {
            (t * omega).sin() / omega * (kx * x + ky * y).cos()
        });
        assert!(half_wave_sinc(&f, t).max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_of_sine_mode() {
        let g = grid();
        let k = 2.0 * PI / g.box_length();
        let f = single_component(&g, |x, _| (k * x).sin());
        let expected = single_component(&g, |x, _| k * (k * x).cos());
        assert!(
            partial_derivative(&f, Axis::X)
                .max_abs_diff(&expected)
                .unwrap()
                < 1e-12
        );
        let constant = VectorField::from_fn(&g, |_, _| [1.0, 2.0, 3.0]);
        assert!(partial_derivative(&constant, Axis::Y).max_abs() < 1e-14);
    }

    #[test]
    fn derivatives_commute() {
        let g = grid();
        let f = VectorField::from_fn(&g, |x, y| {
            [
                (-(x * x + 2.0 * y * y) / 3.0).exp(),
                (0.5 * x).sin() * (-(y * y) / 5.0).exp(),
                0.0,
            ]
        });
        let xy = partial_derivative(&partial_derivative(&f, Axis::X), Axis::Y);
        let yx = partial_derivative(&partial_derivative(&f, Axis::Y), Axis::X);
        assert!(xy.max_abs_diff(&yx).unwrap() < 1e-12);
    }

    #[test]
    fn nyquist_derivative_stays_real() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        // cos(4x) lives entirely on the Nyquist column
        let f = single_component(&g, |x, _| (4.0 * x).cos());
        let d = partial_derivative(&f, Axis::X);
        assert!(d.max_abs() < 1e-13);
    }
}
