use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::trapezoid;
use crate::spectral::{ensure_same_grid, Grid, VectorField};

use super::data::vector_norm;

/// Snapshots on `M+1` uniform nodes of `[0, T]`.
#[derive(Clone, Debug)]
pub struct SpaceTimeField {
    grid: Arc<Grid>,
    t_final: f64,
    snapshots: Vec<VectorField>,
    velocities: Option<Vec<VectorField>>,
}

impl SpaceTimeField {
    pub fn new(
        t_final: f64,
        snapshots: Vec<VectorField>,
        velocities: Option<Vec<VectorField>>,
    ) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::param("snapshots", "need at least two time nodes"));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::param(
                "T",
                format!("must be positive, got {t_final}"),
            ));
        }
        let grid = snapshots[0].grid().clone();
        for s in &snapshots {
            ensure_same_grid(&grid, s.grid())?;
        }
        if let Some(v) = &velocities {
            if v.len() != snapshots.len() {
                return Err(Error::param("velocities", "length must match snapshots"));
            }
            for s in v {
                ensure_same_grid(&grid, s.grid())?;
            }
        }
        Ok(Self {
            grid,
            t_final,
            snapshots,
            velocities,
        })
    }

    /// A field sampled from `f(t)` at the nodes.
    pub fn from_fn(
        grid: &Arc<Grid>,
        t_final: f64,
        intervals: usize,
        f: impl Fn(f64) -> VectorField,
    ) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::param("M", "must be at least 1"));
        }
        let dt = t_final / intervals as f64;
        let snapshots = (0..=intervals).map(|j| f(j as f64 * dt)).collect();
        let out = Self::new(t_final, snapshots, None)?;
        ensure_same_grid(grid, &out.grid)?;
        Ok(out)
    }

    pub fn zeros(grid: &Arc<Grid>, t_final: f64, intervals: usize) -> Result<Self> {
        Self::from_fn(grid, t_final, intervals, |_| VectorField::zeros(grid))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.snapshots.len() - 1
    }

    pub fn nodes(&self) -> usize {
        self.snapshots.len()
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.intervals() as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes()).map(|j| self.time(j)).collect()
    }

    pub fn snapshot(&self, index: usize) -> Result<&VectorField> {
        self.snapshots.get(index).ok_or(Error::TimeIndexOutOfRange {
            index,
            nodes: self.nodes(),
        })
    }

    pub fn velocity(&self, index: usize) -> Result<&VectorField> {
        let v = self.velocities.as_ref().ok_or_else(|| {
            Error::MissingVelocity("space-time field carries no velocities".into())
        })?;
        v.get(index).ok_or(Error::TimeIndexOutOfRange {
            index,
            nodes: self.nodes(),
        })
    }

    pub fn snapshots(&self) -> &[VectorField] {
        &self.snapshots
    }

    pub fn velocities(&self) -> Option<&[VectorField]> {
        self.velocities.as_deref()
    }

    /// `max_j ‖u(t_j)‖_{Ḣˢ}`
    pub fn c0_norm(&self, s: f64) -> f64 {
        self.snapshots
            .iter()
            .map(|u| vector_norm(u, s))
            .fold(0.0, f64::max)
    }

    /// `max_j ‖∂ₜu(t_j)‖_{Ḣˢ}`
    pub fn velocity_c0_norm(&self, s: f64) -> Result<f64> {
        let v = self.velocities.as_ref().ok_or_else(|| {
            Error::MissingVelocity("space-time field carries no velocities".into())
        })?;
        Ok(v.iter().map(|u| vector_norm(u, s)).fold(0.0, f64::max))
    }

    /// `‖u‖_{L¹Ḣˢ}` by the trapezoid rule.
    pub fn l1_norm(&self, s: f64) -> f64 {
        let values: Vec<f64> = self.snapshots.iter().map(|u| vector_norm(u, s)).collect();
        trapezoid(&values, self.dt())
    }

    /// `‖u‖_{L²Ḣˢ}` by the trapezoid rule.
    pub fn l2_norm(&self, s: f64) -> f64 {
        let values: Vec<f64> = self
            .snapshots
            .iter()
            .map(|u| vector_norm(u, s).powi(2))
            .collect();
        trapezoid(&values, self.dt()).sqrt()
    }

    /// `‖u‖_{C⁰Ḣ^{3/2}} + ‖∂ₜu‖_{C⁰Ḣ^{1/2}}`
    pub fn energy_norm(&self) -> Result<f64> {
        Ok(self.c0_norm(1.5) + self.velocity_c0_norm(0.5)?)
    }

    pub fn sub(&self, other: &SpaceTimeField) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        if self.nodes() != other.nodes()
            || (self.t_final - other.t_final).abs() > 1e-14 * self.t_final
        {
            return Err(Error::param(
                "nodes",
                "space-time fields live on different time grids",
            ));
        }
        let snapshots = self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        let velocities = match (&self.velocities, &other.velocities) {
            (Some(a), Some(b)) => Some(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.sub(y))
                    .collect::<Result<Vec<_>>>()?,
            ),
            _ => None,
        };
        Self::new(self.t_final, snapshots, velocities)
    }

    /// Keeps every `stride`-th node (the last node must be kept).
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.intervals().is_multiple_of(stride) {
            return Err(Error::param(
                "stride",
                format!("{stride} does not divide M = {}", self.intervals()),
            ));
        }
        let pick = |v: &Vec<VectorField>| v.iter().step_by(stride).cloned().collect::<Vec<_>>();
        Self::new(
            self.t_final,
            pick(&self.snapshots),
            self.velocities.as_ref().map(pick),
        )
    }
}
