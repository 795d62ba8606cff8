//! Pointwise null forms and the wedge nonlinearity, evaluated
//! pseudo-spectrally with two-thirds dealiasing of both factors and of the
//! product.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{differentiate_into, ensure_same_grid, Axis, Grid, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullFormKind {
    /// `-(∂ₜu)(∂ₜv) + ∇u·∇v`
    Q00,
    /// `(∂ᵢu)(∂ⱼv) - (∂ⱼu)(∂ᵢv)`, spatial indices in `{1, 2}`.
    Qij(usize, usize),
    /// `(∂ₜu)(∂ⱼv) - (∂ⱼu)(∂ₜv)`
    Q0j(usize),
}

impl NullFormKind {
    pub fn validate(self) -> Result<Self> {
        let spatial = |k: usize| k == 1 || k == 2;
        match self {
            NullFormKind::Q00 => Ok(self),
            NullFormKind::Qij(i, j) if spatial(i) && spatial(j) && i != j => Ok(self),
            NullFormKind::Qij(i, j) => Err(Error::param(
                "kind",
                format!("Q_ij needs distinct indices in {{1, 2}}, got ({i}, {j})"),
            )),
            NullFormKind::Q0j(j) if spatial(j) => Ok(self),
            NullFormKind::Q0j(j) => Err(Error::param(
                "kind",
                format!("Q_0j needs j in {{1, 2}}, got {j}"),
            )),
        }
    }

    fn needs_velocity(self) -> bool {
        !matches!(self, NullFormKind::Qij(..))
    }
}

/// A scalar field together with its time derivative, when known.
#[derive(Clone, Debug)]
pub struct ScalarWave {
    pub value: ScalarField,
    pub velocity: Option<ScalarField>,
}

impl ScalarWave {
    pub fn new(value: ScalarField) -> Self {
        Self {
            value,
            velocity: None,
        }
    }

    pub fn with_velocity(value: ScalarField, velocity: ScalarField) -> Self {
        Self {
            value,
            velocity: Some(velocity),
        }
    }
}

fn axis_of(index: usize) -> Axis {
    if index == 1 {
        Axis::X
    } else {
        Axis::Y
    }
}

pub fn null_form(kind: NullFormKind, u: &ScalarWave, v: &ScalarWave) -> Result<ScalarField> {
    let kind = kind.validate()?;
    let grid = Arc::clone(u.value.grid());
    ensure_same_grid(&grid, v.value.grid())?;
    let velocity = |w: &ScalarWave, name: &str| -> Result<Vec<Complex64>> {
        match &w.velocity {
            Some(vel) => {
                ensure_same_grid(&grid, vel.grid())?;
                Ok(vel.coefficients().into_owned())
            }
            None => Err(Error::MissingVelocity(format!("{kind:?} needs ∂ₜ{name}"))),
        }
    };
    let (ut, vt) = if kind.needs_velocity() {
        (velocity(u, "u")?, velocity(v, "v")?)
    } else {
        (Vec::new(), Vec::new())
    };
    let uc = u.value.coefficients();
    let vc = v.value.coefficients();
    let d = |c: &[Complex64], axis| {
        let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
        differentiate_into(&grid, c, axis, &mut out);
        out
    };
    let out = match kind {
        NullFormKind::Q00 => {
            let (ux, uy, vx, vy) = (
                d(&uc, Axis::X),
                d(&uc, Axis::Y),
                d(&vc, Axis::X),
                d(&vc, Axis::Y),
            );
            product_sum_real(&grid, &[(-1.0, &ut, &vt), (1.0, &ux, &vx), (1.0, &uy, &vy)])
        }
        NullFormKind::Qij(i, j) => {
            let (ui, uj, vi, vj) = (
                d(&uc, axis_of(i)),
                d(&uc, axis_of(j)),
                d(&vc, axis_of(i)),
                d(&vc, axis_of(j)),
            );
            product_sum_real(&grid, &[(1.0, &ui, &vj), (-1.0, &uj, &vi)])
        }
        NullFormKind::Q0j(j) => {
            let (uj, vj) = (d(&uc, axis_of(j)), d(&vc, axis_of(j)));
            product_sum_real(&grid, &[(1.0, &ut, &vj), (-1.0, &uj, &vt)])
        }
    };
    Ok(ScalarField::from_coefficients_unchecked(&grid, out))
}

/// `2 uₓ ∧ u_y`, by direct cross product of the dealiased derivatives.
pub fn cmc_nonlinearity(u: &VectorField) -> VectorField {
    wedge(u).scaled(2.0)
}

/// `uₓ ∧ u_y` (without the factor 2).
pub fn wedge(u: &VectorField) -> VectorField {
    let coefficients = u.coefficients();
    let out = wedge_coefficients(
        u.grid(),
        [&coefficients[0], &coefficients[1], &coefficients[2]],
    );
    VectorField::from_coefficients_unchecked(u.grid(), out)
}

/// `2 uₓ ∧ u_y` assembled from the component identities
/// `(2Q₁₂(u₂,u₃), 2Q₁₂(u₃,u₁), 2Q₁₂(u₁,u₂))`.
pub fn cmc_nonlinearity_via_null_forms(u: &VectorField) -> Result<VectorField> {
    let c = u.components();
    let q = |a: usize, b: usize| -> Result<ScalarField> {
        Ok(null_form(
            NullFormKind::Qij(1, 2),
            &ScalarWave::new(c[a].clone()),
            &ScalarWave::new(c[b].clone()),
        )?
        .scaled(2.0))
    };
    VectorField::new([q(1, 2)?, q(2, 0)?, q(0, 1)?])
}

/// Dealiased `uₓ ∧ u_y` on raw Fourier coefficients.
pub(crate) fn wedge_coefficients(grid: &Grid, u: [&[Complex64]; 3]) -> [Vec<Complex64>; 3] {
    let len = grid.len();
    let mut dx: [Vec<f64>; 3] = Default::default();
    let mut dy: [Vec<f64>; 3] = Default::default();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for c in 0..3 {
        differentiate_into(grid, u[c], Axis::X, &mut buf);
        dx[c] = to_physical_real(grid, &mut buf);
        differentiate_into(grid, u[c], Axis::Y, &mut buf);
        dy[c] = to_physical_real(grid, &mut buf);
    }
    let mut out: [Vec<Complex64>; 3] = Default::default();
    for (c, slot) in out.iter_mut().enumerate() {
        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
        let mut values: Vec<Complex64> = (0..len)
            .map(|p| Complex64::new(dx[a][p] * dy[b][p] - dx[b][p] * dy[a][p], 0.0))
            .collect();
        grid.forward(&mut values);
        grid.truncate(&mut values);
        *slot = values;
    }
    out
}

/// Truncates, transforms to physical space and keeps the real part.
fn to_physical_real(grid: &Grid, coefficients: &mut [Complex64]) -> Vec<f64> {
    grid.truncate(coefficients);
    grid.inverse(coefficients);
    coefficients.iter().map(|z| z.re).collect()
}

/// `Σ coef · a · b` for real fields given by coefficients, dealiased.
fn product_sum_real(grid: &Grid, terms: &[(f64, &[Complex64], &[Complex64])]) -> Vec<Complex64> {
    let len = grid.len();
    let mut acc = vec![0.0; len];
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for &(coef, a, b) in terms {
        buf.copy_from_slice(a);
        let pa = to_physical_real(grid, &mut buf);
        buf.copy_from_slice(b);
        let pb = to_physical_real(grid, &mut buf);
        for ((s, x), y) in acc.iter_mut().zip(&pa).zip(&pb) {
            *s += coef * (x * y);
        }
    }
    let mut out: Vec<Complex64> = acc.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    grid.forward(&mut out);
    grid.truncate(&mut out);
    out
}
