use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::data::CauchyData;
use super::picard::{picard_solve_strict, PicardOptions};
use super::schedule::IterationSchedule;

/// Tolerance on `difference ≤ Bε` for discretisation effects.
pub const CONTINUITY_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub epsilon: f64,
    /// `‖u-v‖_{C⁰Ḣ^{3/2}} + ‖∂ₜu-∂ₜv‖_{C⁰Ḣ^{1/2}}`
    pub difference: f64,
    pub bound: f64,
    /// `difference / (Bε)`
    pub ratio: f64,
    pub passed: bool,
    pub guarantees_hold: bool,
}

/// Solves from `data` and from `data + ε·perturbation/‖perturbation‖` and
/// compares the two solutions against `Bε`.
pub fn continuity_experiment(
    data: &CauchyData,
    perturbation: &CauchyData,
    epsilon: f64,
    schedule: &IterationSchedule,
    options: &PicardOptions,
) -> Result<ContinuityReport> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::param(
            "epsilon",
            format!("must be nonnegative, got {epsilon}"),
        ));
    }
    let direction = if epsilon == 0.0 {
        perturbation.scaled(0.0)
    } else {
        perturbation.normalized_to(epsilon)?
    };
    let other = data.add_scaled(1.0, &direction)?;
    let a = picard_solve_strict(data, schedule, options)?;
    let b = picard_solve_strict(&other, schedule, options)?;
    let difference = b.solution.sub(&a.solution)?.energy_norm()?;
    let bound = a.schedule.b * epsilon;
    let guarantees_hold = a.guarantees_hold && b.guarantees_hold;
    Ok(ContinuityReport {
        epsilon,
        difference,
        bound,
        ratio: if bound > 0.0 { difference / bound } else { 0.0 },
        passed: difference <= bound * (1.0 + CONTINUITY_SLACK),
        guarantees_hold,
    })
}
