use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default `C`: twice the empirical estimate of the `Q₁₂` constant, rounded up.
pub const DEFAULT_BILINEAR_CONSTANT: f64 = 0.5;

/// Relative slack when re-evaluating the time conditions at their boundary.
const CONDITION_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleChecks {
    /// `4T^{1/2} ≤ 1/2`
    pub step_contraction: bool,
    /// `2T^{1/2}A ≤ K`
    pub forcing_budget: bool,
    /// `2CT^{1/2}(K + 2T^{1/2}A) ≤ 1/4`
    pub bilinear_contraction: bool,
}

impl ScheduleChecks {
    pub fn all(&self) -> bool {
        self.step_contraction && self.forcing_budget && self.bilinear_contraction
    }
}

/// Constants of the contraction argument for data of size `K` and bilinear
/// constant `C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSchedule {
    pub k: f64,
    pub c: f64,
    pub a: f64,
    pub t: f64,
    pub b: f64,
    pub checks: ScheduleChecks,
}

pub fn make_schedule(k: f64, c: f64) -> Result<IterationSchedule> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::param(
            "K",
            format!("must be positive and finite, got {k}"),
        ));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param(
            "C",
            format!("must be positive and finite, got {c}"),
        ));
    }
    let a = forcing_budget(k, c);
    let t1: f64 = 1.0 / 64.0;
    let t2 = (k / (2.0 * a)).powi(2);
    // 4CA s² + 2CK s - 1/4 = 0, s = √T
    let (qa, qb) = (4.0 * c * a, 2.0 * c * k);
    let disc = qb * qb + qa;
    let s3 = 0.5 / (qb + disc.sqrt());
    let t = t1.min(t2).min(s3 * s3);
    Ok(IterationSchedule::evaluate(k, c, a, t))
}

/// `A = max{2K, 4CK²}`.
pub fn forcing_budget(k: f64, c: f64) -> f64 {
    (2.0 * k).max(4.0 * c * k * k)
}

impl IterationSchedule {
    /// Schedule with a user-chosen horizon; checks report whether the
    /// contraction guarantees still apply.
    pub fn with_horizon(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::param(
                "T",
                format!("must be positive and finite, got {t}"),
            ));
        }
        Ok(Self::evaluate(self.k, self.c, self.a, t))
    }

    fn evaluate(k: f64, c: f64, a: f64, t: f64) -> Self {
        let s = t.sqrt();
        let le = |lhs: f64, rhs: f64| lhs <= rhs * (1.0 + CONDITION_SLACK);
        let checks = ScheduleChecks {
            step_contraction: le(4.0 * s, 0.5),
            forcing_budget: le(2.0 * s * a, k),
            bilinear_contraction: le(2.0 * c * s * (k + 2.0 * s * a), 0.25),
        };
        let b = 4.0f64.max(4.0 * c * (k + 2.0 * s * a));
        Self {
            k,
            c,
            a,
            t,
            b,
            checks,
        }
    }

    pub fn guarantees_hold(&self) -> bool {
        self.checks.all()
    }
}
