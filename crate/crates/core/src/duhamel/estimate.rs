use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectral::{Grid, VectorField};

use super::data::{CauchyData, DataSpec};
use super::linear::solve_linear;
use super::spacetime::SpaceTimeField;

/// Both sides of `‖u‖_{C⁰Ḣ^{3/2}} + ‖∂ₜu‖_{C⁰Ḣ^{1/2}} ≤ 2(‖u₀‖_{Ḣ^{3/2}} + ‖u₁‖_{Ḣ^{1/2}} + ‖F‖_{L¹Ḣ^{1/2}})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub lhs: f64,
    pub data_norm: f64,
    pub forcing_norm: f64,
    /// `2 (data_norm + forcing_norm)`
    pub rhs: f64,
    pub ratio: f64,
}

pub fn energy_estimate(data: &CauchyData, forcing: &SpaceTimeField) -> Result<EnergyEstimate> {
    let u = solve_linear(data, forcing)?;
    let lhs = u.energy_norm()?;
    let data_norm = data.norm();
    let forcing_norm = forcing.l1_norm(0.5);
    let rhs = 2.0 * (data_norm + forcing_norm);
    Ok(EnergyEstimate {
        lhs,
        data_norm,
        forcing_norm,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
    })
}

/// `F(t) = cos(αt) A + sin(βt) B` with random band-limited `A`, `B` and
/// frequencies `α, β ∈ [0, 4)`, drawn from stream `(seed, 1)`.
pub fn random_forcing(
    grid: &Arc<Grid>,
    wavenumber: f64,
    t_final: f64,
    intervals: usize,
    seed: u64,
) -> Result<SpaceTimeField> {
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::param("T", "must be positive"));
    }
    let spec = DataSpec::Random {
        wavenumber,
        with_velocity: true,
    };
    let (a, b) = spec.build(grid, seed)?;
    let mut rng = rng::stream(seed, 1);
    let alpha = 4.0 * rng.random::<f64>();
    let beta = 4.0 * rng.random::<f64>();
    SpaceTimeField::from_fn(grid, t_final, intervals, |t| {
        a.scaled((alpha * t).cos())
            .add_scaled((beta * t).sin(), &b)
            .unwrap_or_else(|_| VectorField::zeros(grid))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_solution_obeys_the_estimate() {
        let g = Grid::with_default_box(16).unwrap();
        let spec = DataSpec::Random {
            wavenumber: 1.0,
            with_velocity: true,
        };
        let data = CauchyData::from_spec(&spec, &g, 4).unwrap();
        let zero = SpaceTimeField::zeros(&g, 2.0, 16).unwrap();
        let e = energy_estimate(&data, &zero).unwrap();
        assert_eq!(e.forcing_norm, 0.0);
        // t = 0 alone gives the data norm; each of u, ∂ₜu is bounded by it
        assert!(e.lhs >= e.data_norm * (1.0 - 1e-12));
        assert!(e.ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn forced_problems_satisfy_the_estimate() {
        let g = Grid::with_default_box(16).unwrap();
        let spec = DataSpec::Random {
            wavenumber: 1.0,
            with_velocity: true,
        };
        for seed in 0..4 {
            let data = CauchyData::from_spec(&spec, &g, seed).unwrap();
            let f = random_forcing(&g, 1.0, 1.0, 16, seed + 100).unwrap();
            let e = energy_estimate(&data, &f).unwrap();
            assert!(e.forcing_norm > 0.0);
            assert!(e.ratio <= 1.0, "ratio {}", e.ratio);
        }
    }

    #[test]
    fn forcing_is_reproducible() {
        let g = Grid::with_default_box(16).unwrap();
        let a = random_forcing(&g, 1.0, 1.0, 4, 9).unwrap();
        let b = random_forcing(&g, 1.0, 1.0, 4, 9).unwrap();
        assert_eq!(a.l1_norm(0.5), b.l1_norm(0.5));
    }
}
