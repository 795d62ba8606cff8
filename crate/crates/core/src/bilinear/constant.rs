use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::trapezoid;
use crate::rng;
use crate::spectral::{differentiate_into, sobolev_norm_sq, Axis, Grid};

use super::density::{in_quarter_band, ProfileFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfWaveSign {
    Plus,
    Minus,
}

impl HalfWaveSign {
    fn factor(self) -> f64 {
        match self {
            HalfWaveSign::Plus => 1.0,
            HalfWaveSign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPair(pub HalfWaveSign, pub HalfWaveSign);

impl SignPair {
    pub const ALL: [SignPair; 4] = [
        SignPair(HalfWaveSign::Plus, HalfWaveSign::Plus),
        SignPair(HalfWaveSign::Minus, HalfWaveSign::Minus),
        SignPair(HalfWaveSign::Plus, HalfWaveSign::Minus),
        SignPair(HalfWaveSign::Minus, HalfWaveSign::Plus),
    ];
}

impl fmt::Display for SignPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |x: HalfWaveSign| if x == HalfWaveSign::Plus { '+' } else { '-' };
        write!(f, "({},{})", s(self.0), s(self.1))
    }
}

/// Grid coefficients of `f`, `g` with a sign pair; `φ_± = e^{±it√-Δ}/√-Δ f`.
#[derive(Clone, Debug)]
pub struct HalfWavePair {
    pub grid: Arc<Grid>,
    pub f_hat: Vec<Complex64>,
    pub g_hat: Vec<Complex64>,
}

impl HalfWavePair {
    /// Fails unless both profiles are mean-free and inside the quarter band.
    pub fn new(grid: &Arc<Grid>, f_hat: Vec<Complex64>, g_hat: Vec<Complex64>) -> Result<Self> {
        for (name, c) in [("f", &f_hat), ("g", &g_hat)] {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "{name} has {} coefficients, grid {}",
                    c.len(),
                    grid.len()
                )));
            }
            if c[0].norm() != 0.0 {
                return Err(Error::NonInvertibleZeroMode { mean: c[0].norm() });
            }
            if c.iter()
                .enumerate()
                .any(|(i, v)| v.norm() != 0.0 && !in_quarter_band(grid, i))
            {
                return Err(Error::param(
                    name,
                    "content outside the quarter band |k| < n/4",
                ));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            f_hat,
            g_hat,
        })
    }

    pub fn f_norm(&self) -> f64 {
        sobolev_norm_sq(&self.grid, &self.f_hat, 0.5).sqrt()
    }

    pub fn g_norm(&self) -> f64 {
        sobolev_norm_sq(&self.grid, &self.g_hat, 0.5).sqrt()
    }

    /// `‖(-Δ)^{1/4} Q₁₂(φ_s, ψ_s')‖_{L²([0,T_w]×box)} / (‖f‖_{Ḣ^{1/2}}‖g‖_{Ḣ^{1/2}})`
    /// for every sign pair, in the order of [`SignPair::ALL`]. Zero profiles
    /// give ratio 0.
    pub fn ratios(&self, window: f64, dt: f64) -> Result<[f64; 4]> {
        if !(window > 0.0 && dt > 0.0 && window.is_finite()) {
            return Err(Error::param("window", "window and dt must be positive"));
        }
        let denominator = self.f_norm() * self.g_norm();
        if denominator == 0.0 {
            return Ok([0.0; 4]);
        }
        let grid = &*self.grid;
        let len = grid.len();
        let steps = (window / dt).ceil().max(1.0) as usize;
        let h = window / steps as f64;
        let omega: Vec<f64> = (0..len).map(|i| grid.xi_norm(i)).collect();
        let mut series: [Vec<f64>; 4] = Default::default();
        let mut evolved = vec![Complex64::new(0.0, 0.0); len];
        for j in 0..=steps {
            let t = j as f64 * h;
            // derivatives [∂ₓ, ∂_y] of [φ₊, φ₋, ψ₊, ψ₋] in physical space
            let mut d: Vec<[Vec<Complex64>; 2]> = Vec::with_capacity(4);
            for (profile, sign) in [
                (&self.f_hat, HalfWaveSign::Plus),
                (&self.f_hat, HalfWaveSign::Minus),
                (&self.g_hat, HalfWaveSign::Plus),
                (&self.g_hat, HalfWaveSign::Minus),
            ] {
                for idx in 0..len {
                    evolved[idx] = if omega[idx] == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        profile[idx]
                            * Complex64::from_polar(
                                1.0 / omega[idx],
                                sign.factor() * t * omega[idx],
                            )
                    };
                }
                let mut pair: [Vec<Complex64>; 2] = Default::default();
                for (slot, axis) in pair.iter_mut().zip([Axis::X, Axis::Y]) {
                    let mut out = vec![Complex64::new(0.0, 0.0); len];
                    differentiate_into(grid, &evolved, axis, &mut out);
                    grid.inverse(&mut out);
                    *slot = out;
                }
                d.push(pair);
            }
            for (p, pair) in SignPair::ALL.iter().enumerate() {
                let a = if pair.0 == HalfWaveSign::Plus {
                    &d[0]
                } else {
                    &d[1]
                };
                let b = if pair.1 == HalfWaveSign::Plus {
                    &d[2]
                } else {
                    &d[3]
                };
                let mut q: Vec<Complex64> = (0..len)
                    .map(|i| a[0][i] * b[1][i] - a[1][i] * b[0][i])
                    .collect();
                grid.forward(&mut q);
                series[p].push(sobolev_norm_sq(grid, &q, 0.5));
            }
        }
        Ok(std::array::from_fn(|p| {
            trapezoid(&series[p], h).sqrt() / denominator
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOptions {
    pub trials: usize,
    pub n: usize,
    pub box_length: f64,
    /// Time window `T_w`; the `L²` time integral runs over `[0, T_w]`.
    pub window: f64,
    pub dt: f64,
    pub seed: u64,
    #[serde(default)]
    pub family: ProfileFamily,
}

impl Default for ConstantOptions {
    fn default() -> Self {
        Self {
            trials: 64,
            n: 128,
            box_length: 80.0,
            window: 8.0,
            dt: 0.25,
            seed: 0,
            family: ProfileFamily::default(),
        }
    }
}

impl ConstantOptions {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(Error::param("window", "must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.window) {
            return Err(Error::param(
                "dt",
                "must be positive and at most the window",
            ));
        }
        self.family.validate()?;
        let band = PI * self.n as f64 / (2.0 * self.box_length);
        if self.family.frequency_reach() >= band {
            return Err(Error::param(
                "family",
                format!(
                    "profiles reach |ξ| = {:.3}, beyond the quarter band {band:.3} of this grid",
                    self.family.frequency_reach()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics {
    pub pair: String,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
    pub min: f64,
    pub ratios: Vec<f64>,
}

impl PairStatistics {
    fn from_ratios(pair: SignPair, ratios: Vec<f64>) -> Self {
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let quantile = |q: f64| {
            let pos = q * (sorted.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        };
        Self {
            pair: pair.to_string(),
            max: *sorted.last().expect("at least one trial"),
            mean: ratios.iter().sum::<f64>() / ratios.len() as f64,
            median: quantile(0.5),
            q90: quantile(0.9),
            min: sorted[0],
            ratios,
        }
    }
}

/// Empirical lower bound for the constant of the `Q₁₂` estimate. The
/// window truncates the time integral, so every ratio is a lower bound
/// for its untruncated value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub empirical_c: f64,
    pub pairs: Vec<PairStatistics>,
    pub options: ConstantOptions,
    /// `max ratio over (+,-)` divided by `max ratio over (+,+)`.
    pub mixed_to_plus_ratio: f64,
}

impl ConstantEstimate {
    pub fn pair(&self, pair: SignPair) -> Option<&PairStatistics> {
        let label = pair.to_string();
        self.pairs.iter().find(|p| p.pair == label)
    }
}

pub fn estimate_constant(options: &ConstantOptions) -> Result<ConstantEstimate> {
    options.validate()?;
    let grid = Grid::new(options.n, options.box_length)?;
    let per_trial: Vec<[f64; 4]> = (0..options.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::stream(options.seed, trial as u64);
            let f = options.family.sample(&mut rng);
            let g = options.family.sample(&mut rng);
            let pair = HalfWavePair::new(&grid, f.on_grid(&grid), g.on_grid(&grid))?;
            if pair.f_norm() == 0.0 || pair.g_norm() == 0.0 {
                return Err(Error::Numerical(format!(
                    "trial {trial}: profile with zero norm"
                )));
            }
            pair.ratios(options.window, options.dt)
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<PairStatistics> = SignPair::ALL
        .iter()
        .enumerate()
        .map(|(p, pair)| {
            PairStatistics::from_ratios(*pair, per_trial.iter().map(|r| r[p]).collect())
        })
        .collect();
    let empirical_c = pairs.iter().map(|p| p.max).fold(0.0, f64::max);
    let mixed_to_plus_ratio = pairs[2].max / pairs[0].max;
    Ok(ConstantEstimate {
        empirical_c,
        pairs,
        options: *options,
        mixed_to_plus_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::density::SpectralProfile;

    fn grid() -> Arc<Grid> {
        Grid::new(32, 20.0).unwrap()
    }

    #[test]
    fn zero_g_gives_zero_ratio() {
        let g = grid();
        let f = SpectralProfile::single([0.8, 0.0], 0.2).on_grid(&g);
        let pair = HalfWavePair::new(&g, f, vec![Complex64::new(0.0, 0.0); g.len()]).unwrap();
        assert_eq!(pair.ratios(2.0, 0.5).unwrap(), [0.0; 4]);
    }

    #[test]
    fn identical_evolutions_cancel() {
        let g = grid();
        let f = SpectralProfile::single([0.8, 0.3], 0.25).on_grid(&g);
        let pair = HalfWavePair::new(&g, f.clone(), f).unwrap();
        let r = pair.ratios(2.0, 0.5).unwrap();
        assert!(r[0] < 1e-14 && r[1] < 1e-14);
        assert!(r[2] > 1e-3);
    }

    #[test]
    fn rejects_content_outside_quarter_band() {
        let g = grid();
        let mut f = vec![Complex64::new(0.0, 0.0); g.len()];
        f[g.index_of_mode(10)] = Complex64::new(1.0, 0.0);
        assert!(HalfWavePair::new(&g, f.clone(), f).is_err());
    }

    #[test]
    fn options_guard_band() {
        let options = ConstantOptions {
            n: 32,
            ..ConstantOptions::default()
        };
        assert!(options.validate().is_err());
    }

    #[test]
    fn small_estimate_is_deterministic() {
        let options = ConstantOptions {
            trials: 3,
            n: 64,
            box_length: 40.0,
            window: 2.0,
            dt: 0.5,
            seed: 9,
            family: ProfileFamily::default(),
        };
        let a = estimate_constant(&options).unwrap();
        let b = estimate_constant(&options).unwrap();
        assert_eq!(a, b);
        assert!(a.empirical_c.is_finite() && a.empirical_c > 0.0);
        let pp = a.pair(SignPair::ALL[0]).unwrap();
        let mm = a.pair(SignPair::ALL[1]).unwrap();
        // real profiles: φ₋ = conj(φ₊), so the two like-sign ratios agree
        assert!((pp.max - mm.max).abs() < 1e-10 * pp.max);
    }
}
