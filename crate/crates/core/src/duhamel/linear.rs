use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{ensure_same_grid, sinc_multiplier, Grid, VectorField};

use super::data::CauchyData;
use super::spacetime::SpaceTimeField;

pub(crate) type Coefficients = [Vec<Complex64>; 3];

/// Solution and time derivative of `u_tt - Δu = F` with the given data, at
/// the nodes of `forcing`:
/// `u(t) = cos(t√-Δ)u₀ + sin(t√-Δ)/√-Δ u₁ + ∫₀ᵗ sin((t-s)√-Δ)/√-Δ F(s) ds`.
///
/// Between nodes the state is carried by the exact propagator and the
/// forcing integral is approximated by the trapezoid rule on the
/// oscillatory integrand.
pub fn solve_linear(data: &CauchyData, forcing: &SpaceTimeField) -> Result<SpaceTimeField> {
    ensure_same_grid(data.grid(), forcing.grid())?;
    let grid = data.grid().clone();
    let f: Vec<Coefficients> = forcing
        .snapshots()
        .iter()
        .map(|s| s.to_spectral().into_coefficients())
        .collect();
    let (u, v) = linear_nodes(
        &grid,
        data,
        Some(&f),
        forcing.t_final(),
        forcing.intervals(),
    );
    assemble(&grid, forcing.t_final(), u, v)
}

/// Free evolution of the data at `M+1` nodes of `[0, T]`.
pub fn solve_free(data: &CauchyData, t_final: f64, intervals: usize) -> Result<SpaceTimeField> {
    if intervals == 0 {
        return Err(Error::param("M", "must be at least 1"));
    }
    let grid = data.grid().clone();
    let (u, v) = linear_nodes(&grid, data, None, t_final, intervals);
    assemble(&grid, t_final, u, v)
}

/// The solution of `u_tt - Δu = F` at node `t_index`, with its time derivative.
pub fn duhamel_step(
    data: &CauchyData,
    forcing: &SpaceTimeField,
    t_index: usize,
) -> Result<(VectorField, VectorField)> {
    if t_index >= forcing.nodes() {
        return Err(Error::TimeIndexOutOfRange {
            index: t_index,
            nodes: forcing.nodes(),
        });
    }
    ensure_same_grid(data.grid(), forcing.grid())?;
    let grid = data.grid().clone();
    let f: Vec<Coefficients> = forcing.snapshots()[..=t_index]
        .iter()
        .map(|s| s.to_spectral().into_coefficients())
        .collect();
    let h = forcing.dt();
    let (mut u, mut v) = if t_index == 0 {
        linear_nodes(&grid, data, None, h, 1)
    } else {
        linear_nodes(&grid, data, Some(&f), h * t_index as f64, t_index)
    };
    let (u, v) = if t_index == 0 {
        (u.swap_remove(0), v.swap_remove(0))
    } else {
        (u.pop().expect("node"), v.pop().expect("node"))
    };
    Ok((
        VectorField::from_coefficients_unchecked(&grid, u),
        VectorField::from_coefficients_unchecked(&grid, v),
    ))
}

pub(crate) fn assemble(
    grid: &std::sync::Arc<Grid>,
    t_final: f64,
    u: Vec<Coefficients>,
    v: Vec<Coefficients>,
) -> Result<SpaceTimeField> {
    let snap = |c: Vec<Coefficients>| {
        c.into_iter()
            .map(|c| VectorField::from_coefficients_unchecked(grid, c))
            .collect::<Vec<_>>()
    };
    SpaceTimeField::new(t_final, snap(u), Some(snap(v)))
}

/// Core recurrence on raw coefficients. `forcing`, when given, holds the
/// coefficients of `F` (in `u_tt - Δu = F`) at the first `intervals + 1` nodes.
pub(crate) fn linear_nodes(
    grid: &Grid,
    data: &CauchyData,
    forcing: Option<&[Coefficients]>,
    t_final: f64,
    intervals: usize,
) -> (Vec<Coefficients>, Vec<Coefficients>) {
    let len = grid.len();
    let h = t_final / intervals as f64;
    let mut u0 = data.u0().to_spectral().into_coefficients();
    let mut u1 = data.u1().to_spectral().into_coefficients();
    for c in 0..3 {
        u0[c][0] = Complex64::new(data.mean0()[c], 0.0);
        u1[c][0] = Complex64::new(data.mean1()[c], 0.0);
    }
    let omega: Vec<f64> = (0..len).map(|idx| grid.xi_norm(idx)).collect();

    let mut us = Vec::with_capacity(intervals + 1);
    let mut vs = Vec::with_capacity(intervals + 1);
    for j in 0..=intervals {
        let t = j as f64 * h;
        let mut u: Coefficients = Default::default();
        let mut v: Coefficients = Default::default();
        for c in 0..3 {
            u[c] = vec![Complex64::new(0.0, 0.0); len];
            v[c] = vec![Complex64::new(0.0, 0.0); len];
        }
        for idx in 0..len {
            let w = omega[idx];
            let (s, co) = (w * t).sin_cos();
            let sinc = sinc_multiplier(t, w);
            for c in 0..3 {
                u[c][idx] = u0[c][idx] * co + u1[c][idx] * sinc;
                v[c][idx] = u0[c][idx] * (-w * s) + u1[c][idx] * co;
            }
        }
        us.push(u);
        vs.push(v);
    }

    let Some(forcing) = forcing else {
        return (us, vs);
    };
    let (cos_h, sin_h, sinc_h): (Vec<f64>, Vec<f64>, Vec<f64>) = {
        let mut a = Vec::with_capacity(len);
        let mut b = Vec::with_capacity(len);
        let mut d = Vec::with_capacity(len);
        for &w in &omega {
            let (s, c) = (w * h).sin_cos();
            a.push(c);
            b.push(s);
            d.push(sinc_multiplier(h, w));
        }
        (a, b, d)
    };
    let half = 0.5 * h;
    for c in 0..3 {
        let mut w = vec![Complex64::new(0.0, 0.0); len];
        let mut wt = vec![Complex64::new(0.0, 0.0); len];
        for j in 0..intervals {
            let g0 = &forcing[j][c];
            let g1 = &forcing[j + 1][c];
            for idx in 0..len {
                let (co, si, sc, om) = (cos_h[idx], sin_h[idx], sinc_h[idx], omega[idx]);
                let (ga, gb) = (g0[idx], g1[idx]);
                let nw = w[idx] * co + wt[idx] * sc + ga * (half * sc);
                let nwt = w[idx] * (-om * si) + wt[idx] * co + (ga * co + gb) * half;
                w[idx] = nw;
                wt[idx] = nwt;
            }
            for idx in 0..len {
                us[j + 1][c][idx] += w[idx];
                vs[j + 1][c][idx] += wt[idx];
            }
        }
    }
    (us, vs)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::duhamel::data::{DataSpec, ModeSpec};
    use crate::spectral::{half_wave_cos, half_wave_sinc};

    fn grid() -> Arc<Grid> {
        Grid::new(16, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_everything_is_zero() {
        let g = grid();
        let data = CauchyData::zeros(&g);
        let f = SpaceTimeField::zeros(&g, 1.0, 8).unwrap();
        let u = solve_linear(&data, &f).unwrap();
        assert_eq!(u.c0_norm(0.0), 0.0);
    }

    #[test]
    fn free_evolution_matches_half_wave_operators() {
        let g = grid();
        let spec = DataSpec::Random {
            wavenumber: 2.0,
            with_velocity: true,
        };
        let data = CauchyData::from_spec(&spec, &g, 3).unwrap();
        let f = SpaceTimeField::zeros(&g, 2.0, 10).unwrap();
        let u = solve_linear(&data, &f).unwrap();
        for j in [0, 3, 10] {
            let t = u.time(j);
            let expected = half_wave_cos(data.u0(), t)
                .add_scaled(1.0, &half_wave_sinc(data.u1(), t))
                .unwrap();
            assert!(u.snapshot(j).unwrap().max_abs_diff(&expected).unwrap() < 1e-12);
        }
    }

    #[test]
    fn means_evolve_affinely() {
        let g = grid();
        let u0 = VectorField::from_fn(&g, |_, _| [1.0, 0.0, 0.0]);
        let u1 = VectorField::from_fn(&g, |_, _| [0.5, -1.0, 0.0]);
        let data = CauchyData::new(u0, u1).unwrap();
        let u = solve_free(&data, 2.0, 4).unwrap();
        let m = u.snapshot(4).unwrap().mean();
        assert!((m[0] - 2.0).abs() < 1e-14 && (m[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_single_mode_forcing() {
        // F = c e^{iξ·x}: û(t) = c(1 - cos(t|ξ|))/|ξ|²
        let g = grid();
        let (kx, ky) = (2i64, 1i64);
        let xi = ((kx * kx + ky * ky) as f64).sqrt();
        let amp = 0.7;
        let forcing_field = VectorField::from_fn(&g, |x, y| {
            [amp * (kx as f64 * x + ky as f64 * y).cos(), 0.0, 0.0]
        });
        let data = CauchyData::zeros(&g);
        let t_final = 1.5;
        let mut errors = Vec::new();
        for m in [16usize, 32, 64] {
            let f = SpaceTimeField::from_fn(&g, t_final, m, |_| forcing_field.clone()).unwrap();
            let (u, _) = duhamel_step(&data, &f, m).unwrap();
            let factor = (1.0 - (t_final * xi).cos()) / (xi * xi);
            let exact = forcing_field.scaled(factor);
            errors.push(u.max_abs_diff(&exact).unwrap());
        }
        let h = t_final / 16.0;
        assert!(errors[0] < h * h);
        let order = (errors[1] / errors[2]).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn step_agrees_with_full_solve() {
        let g = grid();
        let spec = DataSpec::Modes {
            modes: vec![ModeSpec {
                component: 1,
                kx: 1,
                ky: 2,
                amplitude: 0.3,
                phase: 0.2,
                velocity: -0.4,
            }],
        };
        let data = CauchyData::from_spec(&spec, &g, 0).unwrap();
        let f = SpaceTimeField::from_fn(&g, 1.0, 8, |t| {
            VectorField::from_fn(&g, |x, y| [t * x.sin(), (y + t).cos(), 0.0])
        })
        .unwrap();
        let full = solve_linear(&data, &f).unwrap();
        for j in [0usize, 1, 5, 8] {
            let (u, v) = duhamel_step(&data, &f, j).unwrap();
            assert!(u.max_abs_diff(full.snapshot(j).unwrap()).unwrap() < 1e-13);
            assert!(v.max_abs_diff(full.velocity(j).unwrap()).unwrap() < 1e-13);
        }
        assert!(matches!(
            duhamel_step(&data, &f, 9),
            Err(Error::TimeIndexOutOfRange { .. })
        ));
    }
}
