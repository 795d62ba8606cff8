use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Largest accepted points-per-axis; keeps decoded sidecars from requesting
/// absurd allocations.
pub const MAX_POINTS_PER_AXIS: usize = 1 << 13;

/// Default periodic box side, `2π · 8`.
pub const DEFAULT_BOX_LENGTH: f64 = 2.0 * std::f64::consts::PI * 8.0;

/// Uniform periodic `n × n` grid on `[-L/2, L/2)²` with cached FFT plans.
///
/// Storage is row-major with `y` as the slow index: `idx = iy * n + ix`.
/// Spectral coefficients are Fourier-series coefficients, i.e. the forward
/// transform carries the `1/n²` factor.
pub struct Grid {
    n: usize,
    box_length: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("box_length", &self.box_length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.box_length == other.box_length
    }
}

impl Grid {
    pub fn new(n: usize, box_length: f64) -> Result<Arc<Grid>> {
        Self::validate_shape(n, box_length)?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scale = 2.0 * std::f64::consts::PI / box_length;
        let wavenumbers = (0..n).map(|i| scale * signed_mode(i, n) as f64).collect();
        Ok(Arc::new(Grid {
            n,
            box_length,
            wavenumbers,
            forward,
            inverse,
        }))
    }

    /// Checks `n` and `L` without planning transforms.
    pub fn validate_shape(n: usize, box_length: f64) -> Result<()> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two and at least 8, got {n}"
            )));
        }
        if n > MAX_POINTS_PER_AXIS {
            return Err(Error::InvalidGrid(format!(
                "points per axis {n} exceeds the limit {MAX_POINTS_PER_AXIS}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        Ok(())
    }

    pub fn with_default_box(n: usize) -> Result<Arc<Grid>> {
        Self::new(n, DEFAULT_BOX_LENGTH)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Number of grid points, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Area element of one cell, used for physical-space quadrature.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Physical coordinate of grid index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.box_length + i as f64 * self.spacing()
    }

    /// Signed integer mode `k ∈ {-n/2, …, n/2-1}` of index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        signed_mode(i, self.n)
    }

    /// Index of the signed mode `k`, wrapping modulo `n`.
    pub fn index_of_mode(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// One-dimensional wavenumber `2πk/L` of index `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.wavenumbers[i]
    }

    /// Wave vector `(ξ_x, ξ_y)` of flat index `idx`.
    #[inline]
    pub fn xi(&self, idx: usize) -> (f64, f64) {
        (
            self.wavenumbers[idx % self.n],
            self.wavenumbers[idx / self.n],
        )
    }

    #[inline]
    pub fn xi_norm(&self, idx: usize) -> f64 {
        let (a, b) = self.xi(idx);
        a.hypot(b)
    }

    /// Largest `|ξ|` represented on the grid (the corner mode).
    pub fn max_xi_norm(&self) -> f64 {
        let k = std::f64::consts::PI * self.n as f64 / self.box_length;
        k * std::f64::consts::SQRT_2
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Whether flat index `idx` survives two-thirds truncation.
    #[inline]
    pub fn is_retained(&self, idx: usize) -> bool {
        let n = self.n as i64;
        let kx = signed_mode(idx % self.n, self.n);
        let ky = signed_mode(idx / self.n, self.n);
        3 * kx.abs() < n && 3 * ky.abs() < n
    }

    /// Zero every mode outside the two-thirds band.
    pub fn truncate(&self, coefficients: &mut [Complex64]) {
        for (idx, c) in coefficients.iter_mut().enumerate() {
            if !self.is_retained(idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// In-place forward transform, physical values to Fourier coefficients
    /// `f(x) = Σ f̂(ξ) e^{iξ·x}` in the box coordinates (origin at the centre).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
        let scale = 1.0 / self.len() as f64;
        for (idx, c) in data.iter_mut().enumerate() {
            *c *= scale * self.origin_sign(idx);
        }
    }

    /// In-place inverse transform, Fourier coefficients to physical values.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for (idx, c) in data.iter_mut().enumerate() {
            *c *= self.origin_sign(idx);
        }
        self.transform(data, &self.inverse);
    }

    /// `e^{-iξ·(L/2, L/2)} = (-1)^{k_x + k_y}`.
    #[inline]
    fn origin_sign(&self, idx: usize) -> f64 {
        if (idx % self.n + idx / self.n).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid size");
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, self.n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, self.n);
    }
}

fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for row in 0..n {
        for col in row + 1..n {
            data.swap(row * n + col, col * n + row);
        }
    }
}
