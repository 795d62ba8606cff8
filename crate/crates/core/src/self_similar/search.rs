//! Levenberg–Marquardt search for nonconstant solutions of the reduced
//! equation among band-limited profiles smooth on the closed disc.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{ModalBasis, Tabulated};
use super::polar::{PolarGrid, MIN_RADIAL_NODES};
use super::profile::gradient_norm_of;
use crate::error::{Error, Result};
use crate::rng;

pub const REGULARITY_NOTE: &str = "profiles are polynomials ρ^m T_j(2ρ²−1)·{cos mθ, sin mθ} of bounded degree: \
     smooth on the closed disc, a strict subclass of C²";

/// Iteration continues past the tolerance down to `tolerance · POLISH`, so
/// the classification is made well inside the converged regime.
const POLISH: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    pub radial_nodes: usize,
    pub theta_nodes: usize,
    pub max_m: u32,
    pub radial_terms: u32,
    pub max_iter: usize,
    /// RMS reduced residual counted as converged.
    pub tolerance: f64,
    /// Weight of the boundary and identity rows.
    pub penalty: f64,
    /// Standard deviation of the initial coefficients.
    pub amplitude: f64,
    /// `‖∇v‖ ≤ trivial_ratio · max(‖v₀ − v̄₀‖, 1)` is classified trivial.
    pub trivial_ratio: f64,
    pub initial_lambda: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            radial_nodes: 64,
            theta_nodes: 64,
            max_m: 4,
            radial_terms: 5,
            max_iter: 200,
            tolerance: 1e-8,
            penalty: 1.0,
            amplitude: 1.0,
            trivial_ratio: 1e-6,
            initial_lambda: 1e-3,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < MIN_RADIAL_NODES {
            return Err(Error::param(
                "radial_nodes",
                format!("need at least {MIN_RADIAL_NODES}"),
            ));
        }
        if self.theta_nodes <= 2 * self.max_m as usize {
            return Err(Error::param("theta_nodes", "must exceed twice max_m"));
        }
        if (self.max_m + 2 * self.radial_terms) as usize >= self.radial_nodes {
            return Err(Error::param("radial_terms", "basis degree exceeds the radial resolution"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be positive"));
        }
        for (name, v) in [
            ("tolerance", self.tolerance),
            ("trivial_ratio", self.trivial_ratio),
            ("initial_lambda", self.initial_lambda),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("penalty", self.penalty), ("amplitude", self.amplitude)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<ModalBasis> {
        ModalBasis::new(self.max_m, self.radial_terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Trivial,
    Nontrivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRun {
    pub seed: u64,
    pub index: u64,
    pub iterations: usize,
    pub accepted: usize,
    pub residual_rms: f64,
    pub residual_max: f64,
    pub objective: f64,
    pub gradient_norm: f64,
    pub initial_scale: f64,
    pub threshold: f64,
    pub converged: bool,
    pub classification: Classification,
    /// Objective after every accepted step, starting with the initial value.
    pub objective_history: Vec<f64>,
    /// Final coefficients, kept for converged nontrivial runs.
    pub counterexample: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSuite {
    pub options: SearchOptions,
    pub basis: ModalBasis,
    pub runs: Vec<SearchRun>,
    pub converged: usize,
    pub nontrivial_converged: usize,
    pub regularity: String,
}

struct Problem<'a> {
    grid: &'a PolarGrid,
    table: Tabulated,
    options: &'a SearchOptions,
    count: usize,
}

struct State {
    residual: DVector<f64>,
    rms: f64,
    max: f64,
    fields: Fields,
}

struct Fields {
    radial: Vec<[f64; 3]>,
    theta: Vec<[f64; 3]>,
}

impl<'a> Problem<'a> {
    fn new(grid: &'a PolarGrid, basis: &ModalBasis, options: &'a SearchOptions) -> Self {
        Self {
            grid,
            table: basis.tabulate(grid),
            options,
            count: basis.len(),
        }
    }

    fn rows(&self) -> usize {
        3 * self.table.points + 3 * self.grid.theta_len() + self.grid.radial_len()
    }

    fn fields(&self, c: &[f64]) -> (Fields, Vec<[f64; 3]>) {
        let points = self.table.points;
        let mut radial = vec![[0.0; 3]; points];
        let mut theta = vec![[0.0; 3]; points];
        let mut linear = vec![[0.0; 3]; points];
        let m = self.grid.theta_len();
        for k in 0..self.count {
            let (vr, vrr, vt) = (
                self.table.slice(&self.table.radial, k),
                self.table.slice(&self.table.radial2, k),
                self.table.slice(&self.table.theta, k),
            );
            let vals = self.table.slice(&self.table.values, k);
            let order2 = self.table.orders[k] * self.table.orders[k];
            for q in 0..3 {
                let ck = c[q * self.count + k];
                if ck == 0.0 {
                    continue;
                }
                for (i, &r) in self.grid.nodes().iter().enumerate() {
                    let (a, b) = (r * r * (1.0 - r * r), r * (1.0 - 2.0 * r * r));
                    for j in 0..m {
                        let idx = i * m + j;
                        radial[idx][q] += ck * vr[idx];
                        theta[idx][q] += ck * vt[idx];
                        linear[idx][q] += ck * (a * vrr[idx] + b * vr[idx] - order2 * vals[idx]);
                    }
                }
            }
        }
        (Fields { radial, theta }, linear)
    }

    fn weights(&self) -> (f64, f64, f64) {
        let mu = self.options.penalty.sqrt();
        (
            1.0 / ((3 * self.table.points) as f64).sqrt(),
            mu / ((3 * self.grid.theta_len()) as f64).sqrt(),
            mu / (self.grid.radial_len() as f64).sqrt(),
        )
    }

    fn evaluate(&self, c: &[f64]) -> State {
        let (fields, linear) = self.fields(c);
        let (w_res, w_bnd, w_id) = self.weights();
        let (n, m) = (self.grid.radial_len(), self.grid.theta_len());
        let h = self.grid.theta_step();
        let mut residual = DVector::zeros(self.rows());
        let (mut sq, mut max) = (0.0, 0.0f64);
        for (i, &r) in self.grid.nodes().iter().enumerate() {
            for j in 0..m {
                let idx = i * m + j;
                let w = super::profile::cross3(fields.radial[idx], fields.theta[idx]);
                for q in 0..3 {
                    let value = linear[idx][q] - 2.0 * r * w[q];
                    sq += value * value;
                    max = max.max(value.abs());
                    residual[3 * idx + q] = w_res * value;
                }
            }
        }
        let mut row = 3 * self.table.points;
        let outer = (n - 1) * m;
        for j in 0..m {
            for q in 0..3 {
                residual[row] = w_bnd * fields.theta[outer + j][q];
                row += 1;
            }
        }
        for (i, &r) in self.grid.nodes().iter().enumerate() {
            let e = r * r * (1.0 - r * r);
            let integral: f64 = (0..m)
                .map(|j| {
                    let idx = i * m + j;
                    let (a, b) = (fields.radial[idx], fields.theta[idx]);
                    h * (e * super::profile::dot3(a, a) - super::profile::dot3(b, b))
                })
                .sum();
            residual[row] = w_id * integral;
            row += 1;
        }
        State {
            residual,
            rms: (sq / (3 * self.table.points) as f64).sqrt(),
            max,
            fields,
        }
    }

    fn jacobian(&self, state: &State) -> DMatrix<f64> {
        let (w_res, w_bnd, w_id) = self.weights();
        let (n, m) = (self.grid.radial_len(), self.grid.theta_len());
        let h = self.grid.theta_step();
        let points = self.table.points;
        let mut jac = DMatrix::zeros(self.rows(), 3 * self.count);
        let f = &state.fields;
        for k in 0..self.count {
            let (vals, vr, vrr, vt) = (
                self.table.slice(&self.table.values, k),
                self.table.slice(&self.table.radial, k),
                self.table.slice(&self.table.radial2, k),
                self.table.slice(&self.table.theta, k),
            );
            let order2 = self.table.orders[k] * self.table.orders[k];
            for qp in 0..3 {
                let col = qp * self.count + k;
                let mut column = jac.column_mut(col);
                for (i, &r) in self.grid.nodes().iter().enumerate() {
                    let (a, b) = (r * r * (1.0 - r * r), r * (1.0 - 2.0 * r * r));
                    for j in 0..m {
                        let idx = i * m + j;
                        // d(v_r ∧ v_θ) = φ_r e_q' ∧ v_θ + v_r ∧ φ_θ e_q'
                        let et = unit_cross(qp, f.theta[idx]);
                        let er = unit_cross(qp, f.radial[idx]);
                        let lin = a * vrr[idx] + b * vr[idx] - order2 * vals[idx];
                        for q in 0..3 {
                            let dw = vr[idx] * et[q] - vt[idx] * er[q];
                            let l = if q == qp { lin } else { 0.0 };
                            column[3 * idx + q] = w_res * (l - 2.0 * r * dw);
                        }
                    }
                }
                let outer = (n - 1) * m;
                for j in 0..m {
                    column[3 * points + 3 * j + qp] = w_bnd * vt[outer + j];
                }
                for (i, &r) in self.grid.nodes().iter().enumerate() {
                    let e = r * r * (1.0 - r * r);
                    let d: f64 = (0..m)
                        .map(|j| {
                            let idx = i * m + j;
                            2.0 * h * (e * f.radial[idx][qp] * vr[idx] - f.theta[idx][qp] * vt[idx])
                        })
                        .sum();
                    column[3 * points + 3 * m + i] = w_id * d;
                }
            }
        }
        jac
    }
}

/// `e_q ∧ a`
#[inline]
fn unit_cross(q: usize, a: [f64; 3]) -> [f64; 3] {
    match q {
        0 => [0.0, -a[2], a[1]],
        1 => [a[2], 0.0, -a[0]],
        _ => [-a[1], a[0], 0.0],
    }
}

fn initial_coefficients(basis: &ModalBasis, amplitude: f64, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, index);
    let mut c = Vec::with_capacity(3 * basis.len());
    for _ in 0..3 {
        for f in &basis.functions {
            let z: f64 = StandardNormal.sample(&mut rng);
            c.push(amplitude * z * (-0.5 * (f.m + f.j) as f64).exp());
        }
    }
    c
}

/// Runs LM from the given coefficients.
pub fn profile_search_from(
    grid: &PolarGrid,
    basis: &ModalBasis,
    options: &SearchOptions,
    initial: Vec<f64>,
    seed: u64,
    index: u64,
) -> Result<SearchRun> {
    options.validate()?;
    if initial.len() != 3 * basis.len() {
        return Err(Error::param("initial", "coefficient count does not match the basis"));
    }
    let problem = Problem::new(grid, basis, options);
    let mut c = initial;
    let mut state = problem.evaluate(&c);
    let initial_scale = {
        let values: Vec<[f64; 3]> = (0..problem.table.points)
            .map(|idx| {
                let mut v = [0.0; 3];
                for k in 0..problem.count {
                    let phi = problem.table.slice(&problem.table.values, k)[idx];
                    for (q, x) in v.iter_mut().enumerate() {
                        *x += c[q * problem.count + k] * phi;
                    }
                }
                v
            })
            .collect();
        oscillation(grid, &values)
    };
    let mut objective = state.residual.norm_squared();
    let mut history = vec![objective];
    let mut lambda = options.initial_lambda;
    let (mut iterations, mut accepted) = (0, 0);
    let mut system: Option<(DMatrix<f64>, DVector<f64>)> = None;
    let polished = options.tolerance * POLISH;
    while iterations < options.max_iter && state.rms > polished && lambda < 1e12 {
        iterations += 1;
        let (a, g) = system.get_or_insert_with(|| {
            let jac = problem.jacobian(&state);
            let jt = jac.transpose();
            (&jt * &jac, &jt * &state.residual)
        });
        let mut damped = a.clone();
        for i in 0..damped.nrows() {
            damped[(i, i)] += lambda * a[(i, i)].max(1e-300);
        }
        let Some(chol) = damped.cholesky() else {
            lambda *= 10.0;
            continue;
        };
        let step = chol.solve(&(-&*g));
        let trial: Vec<f64> = c.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
        let next = problem.evaluate(&trial);
        let value = next.residual.norm_squared();
        if value < objective {
            c = trial;
            state = next;
            objective = value;
            history.push(objective);
            accepted += 1;
            lambda = (lambda / 10.0).max(1e-15);
            system = None;
        } else {
            lambda *= 10.0;
        }
    }
    let gradient_norm = gradient_norm_of(grid, &state.fields.radial, &state.fields.theta);
    let threshold = options.trivial_ratio * initial_scale.max(1.0);
    let converged = state.rms <= options.tolerance;
    let classification = if gradient_norm <= threshold {
        Classification::Trivial
    } else {
        Classification::Nontrivial
    };
    Ok(SearchRun {
        seed,
        index,
        iterations,
        accepted,
        residual_rms: state.rms,
        residual_max: state.max,
        objective,
        gradient_norm,
        initial_scale,
        threshold,
        converged,
        classification,
        objective_history: history,
        counterexample: (converged && classification == Classification::Nontrivial).then(|| c.clone()),
    })
}

fn oscillation(grid: &PolarGrid, values: &[[f64; 3]]) -> f64 {
    let area = 2.0 * std::f64::consts::PI;
    let mut total = 0.0;
    for q in 0..3 {
        let comp: Vec<f64> = values.iter().map(|v| v[q]).collect();
        let mean = grid.integrate(&comp) / area;
        let sq: Vec<f64> = comp.iter().map(|x| (x - mean).powi(2)).collect();
        total += grid.integrate(&sq);
    }
    total.max(0.0).sqrt()
}

/// One search from random smooth initial data drawn from stream
/// `(seed, index)`.
pub fn profile_search(seed: u64, index: u64, options: &SearchOptions) -> Result<SearchRun> {
    options.validate()?;
    let grid = PolarGrid::new(options.radial_nodes, options.theta_nodes)?;
    let basis = options.basis()?;
    let initial = initial_coefficients(&basis, options.amplitude, seed, index);
    profile_search_from(&grid, &basis, options, initial, seed, index)
}

/// `runs` independent searches, in parallel.
pub fn falsification_suite(seed: u64, runs: usize, options: &SearchOptions) -> Result<SearchSuite> {
    options.validate()?;
    if runs == 0 {
        return Err(Error::param("runs", "must be positive"));
    }
    let grid = PolarGrid::new(options.radial_nodes, options.theta_nodes)?;
    let basis = options.basis()?;
    let results: Vec<SearchRun> = (0..runs as u64)
        .into_par_iter()
        .map(|index| {
            let initial = initial_coefficients(&basis, options.amplitude, seed, index);
            profile_search_from(&grid, &basis, options, initial, seed, index)
        })
        .collect::<Result<_>>()?;
    let converged = results.iter().filter(|r| r.converged).count();
    let nontrivial_converged = results
        .iter()
        .filter(|r| r.converged && r.classification == Classification::Nontrivial)
        .count();
    Ok(SearchSuite {
        options: options.clone(),
        basis,
        runs: results,
        converged,
        nontrivial_converged,
        regularity: REGULARITY_NOTE.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::self_similar::{reduced_residual, Parametrization};

    fn small() -> SearchOptions {
        SearchOptions {
            radial_nodes: 24,
            theta_nodes: 16,
            max_m: 2,
            radial_terms: 3,
            max_iter: 100,
            ..SearchOptions::default()
        }
    }

    #[test]
    fn constant_start_is_immediately_trivial() {
        let o = small();
        let grid = PolarGrid::new(o.radial_nodes, o.theta_nodes).unwrap();
        let basis = o.basis().unwrap();
        let run = profile_search_from(&grid, &basis, &o, vec![0.0; 3 * basis.len()], 0, 0).unwrap();
        assert_eq!(run.iterations, 0);
        assert!(run.converged);
        assert_eq!(run.classification, Classification::Trivial);
        assert_eq!(run.gradient_norm, 0.0);
    }

    #[test]
    fn residual_rows_match_reduced_residual() {
        let o = small();
        let grid = PolarGrid::new(o.radial_nodes, o.theta_nodes).unwrap();
        let basis = o.basis().unwrap();
        let c = initial_coefficients(&basis, 1.0, 5, 0);
        let problem = Problem::new(&grid, &basis, &o);
        let state = problem.evaluate(&c);
        let v = basis.profile(&grid, &c).unwrap();
        assert_eq!(v.parametrization(), Parametrization::Rho);
        let direct = reduced_residual(&v).unwrap();
        assert!((state.rms - direct.rms()).abs() < 1e-9 * direct.rms());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let o = small();
        let grid = PolarGrid::new(o.radial_nodes, o.theta_nodes).unwrap();
        let basis = o.basis().unwrap();
        let c = initial_coefficients(&basis, 0.7, 9, 1);
        let problem = Problem::new(&grid, &basis, &o);
        let state = problem.evaluate(&c);
        let jac = problem.jacobian(&state);
        let h = 1e-6;
        for col in [0, 5, basis.len() + 3, 3 * basis.len() - 1] {
            let mut plus = c.clone();
            let mut minus = c.clone();
            plus[col] += h;
            minus[col] -= h;
            let fd = (problem.evaluate(&plus).residual - problem.evaluate(&minus).residual) / (2.0 * h);
            let err = (&fd - jac.column(col)).amax();
            assert!(err < 1e-7 * (1.0 + fd.amax()), "column {col}: {err}");
        }
    }

    #[test]
    fn accepted_steps_decrease_objective() {
        let run = profile_search(11, 0, &small()).unwrap();
        assert!(run.objective_history.windows(2).all(|w| w[1] < w[0]));
        assert!(run.accepted + 1 == run.objective_history.len());
    }

    #[test]
    fn small_suite_finds_only_trivial_profiles() {
        let suite = falsification_suite(3, 4, &small()).unwrap();
        assert_eq!(suite.runs.len(), 4);
        assert_eq!(suite.nontrivial_converged, 0);
        for run in &suite.runs {
            if run.converged {
                assert_eq!(run.classification, Classification::Trivial);
            }
        }
    }

    #[test]
    fn options_are_validated() {
        let mut o = small();
        o.radial_nodes = 8;
        assert!(o.validate().is_err());
        let mut o = small();
        o.theta_nodes = 4;
        assert!(o.validate().is_err());
        let mut o = small();
        o.tolerance = 0.0;
        assert!(o.validate().is_err());
        assert!(falsification_suite(0, 0, &small()).is_err());
    }
}
