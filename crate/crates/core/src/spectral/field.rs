use std::borrow::Cow;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Clone, Debug)]
enum Values {
    Physical(Vec<f64>),
    Spectral(Vec<Complex64>),
}

/// Real scalar field on a periodic grid, held either as point values or as
/// Fourier coefficients.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Values,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: Values::Spectral(vec![Complex64::new(0.0, 0.0); grid.len()]),
        }
    }

    pub fn from_physical(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        check_len(grid, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("physical values must be finite".into()));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values: Values::Physical(values),
        })
    }

    pub fn from_spectral(grid: &Arc<Grid>, coefficients: Vec<Complex64>) -> Result<Self> {
        check_len(grid, coefficients.len())?;
        if coefficients
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::Domain("spectral coefficients must be finite".into()));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values: Values::Spectral(coefficients),
        })
    }

    /// Samples `f(x, y)` at the grid points.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let values = (0..grid.len())
            .map(|idx| f(grid.coordinate(idx % n), grid.coordinate(idx / n)))
            .collect();
        Self {
            grid: Arc::clone(grid),
            values: Values::Physical(values),
        }
    }

    pub(crate) fn from_coefficients_unchecked(
        grid: &Arc<Grid>,
        coefficients: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(coefficients.len(), grid.len());
        Self {
            grid: Arc::clone(grid),
            values: Values::Spectral(coefficients),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match self.values {
            Values::Physical(_) => Representation::Physical,
            Values::Spectral(_) => Representation::Spectral,
        }
    }

    pub fn coefficients(&self) -> Cow<'_, [Complex64]> {
        match &self.values {
            Values::Spectral(c) => Cow::Borrowed(c),
            Values::Physical(v) => {
                let mut data: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                self.grid.forward(&mut data);
                Cow::Owned(data)
            }
        }
    }

    pub fn values(&self) -> Cow<'_, [f64]> {
        match &self.values {
            Values::Physical(v) => Cow::Borrowed(v),
            Values::Spectral(c) => {
                let mut data = c.clone();
                self.grid.inverse(&mut data);
                Cow::Owned(data.into_iter().map(|z| z.re).collect())
            }
        }
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        match self.values {
            Values::Spectral(c) => c,
            Values::Physical(_) => self.coefficients().into_owned(),
        }
    }

    pub fn to_spectral(&self) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: Values::Spectral(self.coefficients().into_owned()),
        }
    }

    pub fn to_physical(&self) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: Values::Physical(self.values().into_owned()),
        }
    }

    pub fn to_representation(&self, repr: Representation) -> Self {
        match repr {
            Representation::Physical => self.to_physical(),
            Representation::Spectral => self.to_spectral(),
        }
    }

    /// Spatial mean over the box (the zero Fourier coefficient).
    pub fn mean(&self) -> f64 {
        match &self.values {
            Values::Spectral(c) => c[0].re,
            Values::Physical(v) => compensated_sum(v.iter().copied()) / v.len() as f64,
        }
    }

    /// Multiplies every Fourier mode by `multiplier(idx)`; result is spectral.
    pub fn apply_multiplier(&self, multiplier: impl Fn(usize) -> Complex64) -> Self {
        let mut coefficients = self.coefficients().into_owned();
        for (idx, c) in coefficients.iter_mut().enumerate() {
            *c *= multiplier(idx);
        }
        Self::from_coefficients_unchecked(&self.grid, coefficients)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let values = match &self.values {
            Values::Physical(v) => Values::Physical(v.iter().map(|x| x * factor).collect()),
            Values::Spectral(c) => Values::Spectral(c.iter().map(|z| z * factor).collect()),
        };
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    /// `self + factor * other`, in spectral form unless both are physical.
    pub fn add_scaled(&self, factor: f64, other: &ScalarField) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let values = match (&self.values, &other.values) {
            (Values::Physical(a), Values::Physical(b)) => {
                Values::Physical(a.iter().zip(b).map(|(x, y)| x + factor * y).collect())
            }
            _ => {
                let b = other.coefficients();
                let mut a = self.coefficients().into_owned();
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x += y * factor;
                }
                Values::Spectral(a)
            }
        };
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    /// Continuum `L²(box)` norm computed from point values.
    pub fn l2_norm_physical(&self) -> f64 {
        let values = self.values();
        (self.grid.cell_area() * compensated_sum(values.iter().map(|v| v * v))).sqrt()
    }

    /// Largest pointwise difference in physical space.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let a = self.values();
        let b = other.values();
        Ok(a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// `ℝ³`-valued field: three scalar components sharing one grid and one
/// representation.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        let grid = Arc::clone(components[0].grid());
        let repr = components[0].representation();
        for c in &components[1..] {
            ensure_same_grid(&grid, c.grid())?;
            if c.representation() != repr {
                return Err(Error::Domain(
                    "vector components must share one representation".into(),
                ));
            }
        }
        Ok(Self { components })
    }

    pub(crate) fn from_coefficients_unchecked(
        grid: &Arc<Grid>,
        coefficients: [Vec<Complex64>; 3],
    ) -> Self {
        let [a, b, c] = coefficients;
        Self {
            components: [
                ScalarField::from_coefficients_unchecked(grid, a),
                ScalarField::from_coefficients_unchecked(grid, b),
                ScalarField::from_coefficients_unchecked(grid, c),
            ],
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            components: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
        }
    }

    /// Samples `f(x, y)` componentwise at the grid points.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        let n = grid.n();
        let mut values = [
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
        ];
        for idx in 0..grid.len() {
            let v = f(grid.coordinate(idx % n), grid.coordinate(idx / n));
            for (dst, x) in values.iter_mut().zip(v) {
                dst.push(x);
            }
        }
        let [a, b, c] = values;
        let make = |v| ScalarField {
            grid: Arc::clone(grid),
            values: Values::Physical(v),
        };
        Self {
            components: [make(a), make(b), make(c)],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn representation(&self) -> Representation {
        self.components[0].representation()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.components
    }

    pub fn coefficients(&self) -> [Cow<'_, [Complex64]>; 3] {
        [
            self.components[0].coefficients(),
            self.components[1].coefficients(),
            self.components[2].coefficients(),
        ]
    }

    pub fn into_coefficients(self) -> [Vec<Complex64>; 3] {
        let [a, b, c] = self.components;
        [
            a.into_coefficients(),
            b.into_coefficients(),
            c.into_coefficients(),
        ]
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            components: [
                f(&self.components[0]),
                f(&self.components[1]),
                f(&self.components[2]),
            ],
        }
    }

    pub fn to_spectral(&self) -> Self {
        self.map(ScalarField::to_spectral)
    }

    pub fn to_physical(&self) -> Self {
        self.map(ScalarField::to_physical)
    }

    pub fn to_representation(&self, repr: Representation) -> Self {
        self.map(|c| c.to_representation(repr))
    }

    pub fn mean(&self) -> [f64; 3] {
        [
            self.components[0].mean(),
            self.components[1].mean(),
            self.components[2].mean(),
        ]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|c| c.scaled(factor))
    }

    pub fn add_scaled(&self, factor: f64, other: &VectorField) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].add_scaled(factor, &other.components[0])?,
                self.components[1].add_scaled(factor, &other.components[1])?,
                self.components[2].add_scaled(factor, &other.components[2])?,
            ],
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub fn l2_norm_physical(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm_physical().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b) in self.components.iter().zip(&other.components) {
            worst = worst.max(a.max_abs_diff(b)?);
        }
        Ok(worst)
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .map(ScalarField::max_abs)
            .fold(0.0, f64::max)
    }
}

pub(crate) fn ensure_same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "n = {} / L = {} versus n = {} / L = {}",
            a.n(),
            a.box_length(),
            b.n(),
            b.box_length()
        )))
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len == grid.len() {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "expected {} values for an n = {} grid, got {len}",
            grid.len(),
            grid.n()
        )))
    }
}
