use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::null_forms::wedge_coefficients;
use crate::numeric::trapezoid;
use crate::spectral::{sobolev_norm_sq, Grid};

use super::data::CauchyData;
use super::linear::{assemble, linear_nodes, Coefficients};
use super::schedule::IterationSchedule;
use super::spacetime::SpaceTimeField;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 30;
/// Consecutive growths of the difference norm that flag divergence.
pub const DIVERGENCE_STREAK: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    /// Number of time intervals `M`.
    pub intervals: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Overrides the schedule's `T` (research mode).
    pub horizon: Option<f64>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            intervals: 64,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
            horizon: None,
        }
    }
}

impl PicardOptions {
    pub fn validate(&self) -> Result<()> {
        if self.intervals == 0 {
            return Err(Error::param("M", "must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("k_max", "must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::param("tol", "must be nonnegative"));
        }
        if let Some(t) = self.horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::param("T", "must be positive"));
            }
        }
        Ok(())
    }
}

/// One row per iteration `k ≥ 0`, comparing `u⁽ᵏ⁺¹⁾` with `u⁽ᵏ⁾`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub k: usize,
    /// `‖u⁽ᵏ⁺¹⁾-u⁽ᵏ⁾‖_{C⁰Ḣ^{3/2}} + ‖∂ₜ(u⁽ᵏ⁺¹⁾-u⁽ᵏ⁾)‖_{C⁰Ḣ^{1/2}}`
    pub diff_norm: f64,
    /// `‖u⁽ᵏ⁺¹⁾ₓ ∧ u⁽ᵏ⁺¹⁾_y‖_{L²Ḣ^{1/2}}`
    pub wedge_norm: f64,
    /// `‖u⁽ᵏ⁺¹⁾ₓ ∧ u⁽ᵏ⁺¹⁾_y - u⁽ᵏ⁾ₓ ∧ u⁽ᵏ⁾_y‖_{L²Ḣ^{1/2}}`
    pub wedge_diff_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractionLedger {
    pub entries: Vec<LedgerEntry>,
}

impl ContractionLedger {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `diff(k)/diff(k-1)` for `k ≥ 1`, skipping rows whose predecessor is
    /// at or below `floor`.
    pub fn diff_ratios(&self, floor: f64) -> Vec<(usize, f64)> {
        self.entries
            .windows(2)
            .filter(|w| w[0].diff_norm > floor)
            .map(|w| (w[1].k, w[1].diff_norm / w[0].diff_norm))
            .collect()
    }

    pub fn max_wedge_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.wedge_norm)
            .fold(0.0, f64::max)
    }

    /// Checks `diff(k) ≤ A/2ᵏ` and `wedge_diff(k) ≤ A/2ᵏ` with relative slack.
    pub fn within_geometric_bounds(&self, a: f64, slack: f64) -> bool {
        self.entries.iter().all(|e| {
            let bound = a / 2f64.powi(e.k as i32) * (1.0 + slack);
            e.diff_norm <= bound && e.wedge_diff_norm <= bound
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,diff_norm,wedge_norm,wedge_diff_norm\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                e.k, e.diff_norm, e.wedge_norm, e.wedge_diff_norm
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub solution: SpaceTimeField,
    pub ledger: ContractionLedger,
    /// Energy-norm distance between the solution and the Duhamel map
    /// applied to it.
    pub residual: f64,
    pub converged: bool,
    pub diverged: bool,
    /// `false` when the horizon or the data size fall outside the schedule.
    pub guarantees_hold: bool,
    pub schedule: IterationSchedule,
}

impl PicardOutcome {
    pub fn iterations(&self) -> usize {
        self.ledger.len()
    }
}

/// Picard iteration `u⁽⁰⁾ = 0`, `□u⁽ᵏ⁺¹⁾ = 2u⁽ᵏ⁾ₓ ∧ u⁽ᵏ⁾_y` with the data,
/// `□ = -∂ₜ² + Δ`, so the Duhamel source is `-2u⁽ᵏ⁾ₓ ∧ u⁽ᵏ⁾_y`.
pub fn picard_solve(
    data: &CauchyData,
    schedule: &IterationSchedule,
    options: &PicardOptions,
) -> Result<PicardOutcome> {
    options.validate()?;
    let schedule = match options.horizon {
        Some(t) => schedule.with_horizon(t)?,
        None => *schedule,
    };
    let grid = data.grid().clone();
    let m = options.intervals;
    let t_final = schedule.t;
    let h = t_final / m as f64;
    let guarantees_hold = schedule.guarantees_hold() && data.norm() <= schedule.k * (1.0 + 1e-12);

    let zero =
        || -> Coefficients { std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); grid.len()]) };
    let mut u: Vec<Coefficients> = (0..=m).map(|_| zero()).collect();
    let mut v: Vec<Coefficients> = (0..=m).map(|_| zero()).collect();
    let mut wedges: Vec<Coefficients> = (0..=m).map(|_| zero()).collect();

    let mut ledger = ContractionLedger::default();
    let mut converged = false;
    let mut diverged = false;
    let mut growth_streak = 0;
    for k in 0..options.max_iterations {
        let forcing = source(&wedges);
        let (nu, nv) = linear_nodes(&grid, data, Some(&forcing), t_final, m);
        let next_wedges = node_wedges(&grid, &nu);
        let diff_norm = max_norm_diff(&grid, &nu, &u, 1.5) + max_norm_diff(&grid, &nv, &v, 0.5);
        let wedge_norm = l2_time(&grid, &next_wedges, None, h);
        let wedge_diff_norm = l2_time(&grid, &next_wedges, Some(&wedges), h);
        if let Some(prev) = ledger.entries.last() {
            if diff_norm > prev.diff_norm {
                growth_streak += 1;
            } else {
                growth_streak = 0;
            }
        }
        ledger.entries.push(LedgerEntry {
            k,
            diff_norm,
            wedge_norm,
            wedge_diff_norm,
        });
        u = nu;
        v = nv;
        wedges = next_wedges;
        if !diff_norm.is_finite() || growth_streak >= DIVERGENCE_STREAK {
            diverged = true;
            break;
        }
        if diff_norm <= options.tolerance {
            converged = true;
            break;
        }
    }

    let residual = {
        let (ru, rv) = linear_nodes(&grid, data, Some(&source(&wedges)), t_final, m);
        max_norm_diff(&grid, &ru, &u, 1.5) + max_norm_diff(&grid, &rv, &v, 0.5)
    };
    Ok(PicardOutcome {
        solution: assemble(&grid, t_final, u, v)?,
        ledger,
        residual,
        converged,
        diverged,
        guarantees_hold,
        schedule,
    })
}

/// Like [`picard_solve`] but returns an error when the iteration diverges.
pub fn picard_solve_strict(
    data: &CauchyData,
    schedule: &IterationSchedule,
    options: &PicardOptions,
) -> Result<PicardOutcome> {
    let outcome = picard_solve(data, schedule, options)?;
    if outcome.diverged {
        return Err(Error::Diverged {
            iteration: outcome.iterations(),
        });
    }
    Ok(outcome)
}

fn source(wedges: &[Coefficients]) -> Vec<Coefficients> {
    wedges
        .iter()
        .map(|w| std::array::from_fn(|c| w[c].iter().map(|z| z * -2.0).collect()))
        .collect()
}

pub(crate) fn node_wedges(grid: &Grid, u: &[Coefficients]) -> Vec<Coefficients> {
    u.iter()
        .map(|s| wedge_coefficients(grid, [&s[0], &s[1], &s[2]]))
        .collect()
}

fn norm_diff(grid: &Grid, a: &Coefficients, b: Option<&Coefficients>, s: f64) -> f64 {
    (0..3)
        .map(|c| match b {
            Some(b) => {
                let d: Vec<Complex64> = a[c].iter().zip(&b[c]).map(|(x, y)| x - y).collect();
                sobolev_norm_sq(grid, &d, s)
            }
            None => sobolev_norm_sq(grid, &a[c], s),
        })
        .sum::<f64>()
        .sqrt()
}

fn max_norm_diff(grid: &Grid, a: &[Coefficients], b: &[Coefficients], s: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| norm_diff(grid, x, Some(y), s))
        .fold(0.0, f64::max)
}

fn l2_time(grid: &Grid, a: &[Coefficients], b: Option<&[Coefficients]>, h: f64) -> f64 {
    let values: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(j, x)| norm_diff(grid, x, b.map(|b| &b[j]), 0.5).powi(2))
        .collect();
    trapezoid(&values, h).sqrt()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::duhamel::data::{DataSpec, ModeSpec};
    use crate::duhamel::schedule::make_schedule;

    fn grid() -> Arc<Grid> {
        Grid::new(32, crate::spectral::DEFAULT_BOX_LENGTH).unwrap()
    }

    fn small_data(g: &Arc<Grid>, norm: f64) -> CauchyData {
        let spec = DataSpec::Modes {
            modes: vec![
                ModeSpec {
                    component: 0,
                    kx: 2,
                    ky: 1,
                    amplitude: 1.0,
                    phase: 0.0,
                    velocity: 0.5,
                },
                ModeSpec {
                    component: 1,
                    kx: -1,
                    ky: 3,
                    amplitude: 0.7,
                    phase: 0.4,
                    velocity: 0.0,
                },
                ModeSpec {
                    component: 2,
                    kx: 3,
                    ky: -2,
                    amplitude: 0.5,
                    phase: 1.0,
                    velocity: -0.3,
                },
            ],
        };
        CauchyData::from_spec(&spec, g, 0)
            .unwrap()
            .normalized_to(norm)
            .unwrap()
    }

    #[test]
    fn zero_data_converges_immediately() {
        let g = grid();
        let schedule = make_schedule(0.1, 1.0).unwrap();
        let out =
            picard_solve(&CauchyData::zeros(&g), &schedule, &PicardOptions::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations(), 1);
        assert_eq!(out.solution.c0_norm(0.0), 0.0);
        assert_eq!(out.residual, 0.0);
    }

    #[test]
    fn small_data_contracts() {
        let g = grid();
        let schedule = make_schedule(0.1, 1.0).unwrap();
        let data = small_data(&g, 0.1);
        let options = PicardOptions {
            intervals: 16,
            ..PicardOptions::default()
        };
        let out = picard_solve(&data, &schedule, &options).unwrap();
        assert!(out.converged && out.guarantees_hold);
        assert!(out.residual < 1e-9);
        for (_, r) in out.ledger.diff_ratios(1e-13) {
            assert!(r <= 0.6);
        }
        assert!(out.ledger.max_wedge_norm() <= 1.05 * schedule.a);
    }

    #[test]
    fn deterministic_pipeline() {
        let g = grid();
        let schedule = make_schedule(0.2, 1.0).unwrap();
        let data = small_data(&g, 0.2);
        let options = PicardOptions {
            intervals: 8,
            ..PicardOptions::default()
        };
        let a = picard_solve(&data, &schedule, &options).unwrap();
        let b = picard_solve(&data, &schedule, &options).unwrap();
        assert_eq!(a.ledger, b.ledger);
        for (x, y) in a.solution.snapshots().iter().zip(b.solution.snapshots()) {
            assert_eq!(x.max_abs_diff(y).unwrap(), 0.0);
        }
    }

    #[test]
    fn long_horizon_marks_guarantees_void() {
        let g = grid();
        let schedule = make_schedule(0.1, 1.0).unwrap();
        let options = PicardOptions {
            intervals: 8,
            horizon: Some(0.5),
            ..PicardOptions::default()
        };
        let out = picard_solve(&small_data(&g, 0.1), &schedule, &options).unwrap();
        assert!(!out.guarantees_hold);
    }

    #[test]
    fn ledger_csv_header() {
        let ledger = ContractionLedger {
            entries: vec![LedgerEntry {
                k: 0,
                diff_norm: 1.0,
                wedge_norm: 0.5,
                wedge_diff_norm: 0.5,
            }],
        };
        assert!(ledger
            .to_csv()
            .starts_with("k,diff_norm,wedge_norm,wedge_diff_norm\n0,"));
    }
}
