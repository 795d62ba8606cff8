use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use super::config::{
    ConstantParams, ContinuityParams, Experiment, KernelParams, RunConfig, ScheduleParams, SearchParams,
    SimulateParams,
};
use super::report::{Recorder, Relation, RunReport, REPORT_FILE};
use crate::bilinear::{estimate_constant, lattice_scan, monte_carlo_scan, KernelSample, ScanReport};
use crate::duhamel::{
    cfl_step, continuity_experiment, energy_drift, leapfrog_oracle, make_schedule, picard_solve, CauchyData,
    DataSpec, IterationSchedule,
};
use crate::error::{Error, Result};
use crate::self_similar::{
    falsification_suite, identity_integral, identity_spread, identity_to_csv, reduced_residual, write_profile,
    Classification, Parametrization, PolarGrid, SelfSimilarProfile,
};
use crate::spectral::io::write_field;
use crate::spectral::Grid;

/// Successive differences at or below this multiple of the data norm are
/// roundoff and left out of the contraction ratios.
pub const RATIO_FLOOR: f64 = 1e-10;
/// Contraction factor allowed per iteration (the argument gives ½).
pub const CONTRACTION_LIMIT: f64 = 0.6;
/// Relative slack on the `A` and `A/2ᵏ` budgets.
pub const BUDGET_SLACK: f64 = 0.05;
/// Oracle discrepancy bound `ORACLE_FACTOR · (T/M)² · ‖data‖`.
pub const ORACLE_FACTOR: f64 = 10.0;
/// Tolerance for the reduced residual of reference profiles.
pub const REFERENCE_RESIDUAL: f64 = 1e-8;
/// Tolerance for the `-π/8` hand value of the identity integral.
pub const HAND_VALUE_TOLERANCE: f64 = 1e-8;

/// Validates, runs the experiment, writes every artifact and
/// `report.json` into the output directory.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let mut rec = Recorder::new(config.output_dir())?;
    let seed = config.seed.unwrap_or(0);
    let outcome = match &config.experiment {
        Experiment::Schedule(p) => schedule(p, &mut rec),
        Experiment::Simulate(p) => simulate(p, seed, &mut rec),
        Experiment::VerifyKernel(p) => verify_kernel(p, seed, &mut rec),
        Experiment::EstimateConstant(p) => constant(p, seed, &mut rec),
        Experiment::SelfsimilarSearch(p) => search(p, seed, &mut rec),
        Experiment::Continuity(p) => continuity(p, seed, &mut rec),
    };
    outcome.map_err(|e| Error::Experiment {
        command: config.command().to_string(),
        source: Box::new(e),
    })?;
    let report = rec.finish(config.clone(), start.elapsed().as_secs_f64());
    std::fs::write(config.output_dir().join(REPORT_FILE), report.to_json()?)?;
    Ok(report)
}

fn write_json<T: Serialize>(rec: &mut Recorder, name: &str, file: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(&serde_json::to_value(value)?)?;
    rec.write_text(name, file, &text)
}

fn record_schedule(rec: &mut Recorder, s: &IterationSchedule) {
    for (name, v) in [("K", s.k), ("C", s.c), ("A", s.a), ("T", s.t), ("B", s.b)] {
        rec.scalar(format!("schedule.{name}"), v);
    }
}

fn schedule(p: &ScheduleParams, rec: &mut Recorder) -> Result<()> {
    let mut s = make_schedule(p.k, p.c)?;
    if let Some(t) = p.horizon {
        s = s.with_horizon(t)?;
    }
    record_schedule(rec, &s);
    let root = s.t.sqrt();
    // the same relative slack the schedule uses at its own boundary
    let edge = 1.0 + 1e-12;
    rec.check("schedule.step_contraction", 4.0 * root, Relation::Le, 0.5 * edge);
    rec.check("schedule.forcing_budget", 2.0 * root * s.a, Relation::Le, s.k * edge);
    rec.check(
        "schedule.bilinear_contraction",
        2.0 * s.c * root * (s.k + 2.0 * root * s.a),
        Relation::Le,
        0.25 * edge,
    );
    write_json(rec, "schedule", "schedule.json", &s)
}

fn build_data(spec: &DataSpec, grid: &std::sync::Arc<Grid>, seed: u64, norm: Option<f64>) -> Result<CauchyData> {
    let data = CauchyData::from_spec(spec, grid, seed)?;
    match norm {
        Some(target) if data.norm() > 0.0 => data.normalized_to(target),
        _ => Ok(data),
    }
}

fn simulate(p: &SimulateParams, seed: u64, rec: &mut Recorder) -> Result<()> {
    let grid = Grid::new(p.n, p.box_length)?;
    let data = build_data(&p.data, &grid, seed, p.data_norm)?;
    let schedule = make_schedule(p.k, p.c)?;
    let out = picard_solve(&data, &schedule, &p.picard_options())?;
    let s = out.schedule;
    let scale = data.norm();
    record_schedule(rec, &s);
    rec.scalar("data.norm", scale);
    rec.scalar("picard.iterations", out.iterations() as f64);
    rec.scalar("picard.residual", out.residual);
    rec.scalar("picard.max_wedge_norm", out.ledger.max_wedge_norm());
    rec.scalar("picard.guarantees_hold", f64::from(u8::from(out.guarantees_hold)));
    rec.check("picard.residual", out.residual, Relation::Le, p.residual_tolerance);
    rec.check("picard.diverged", f64::from(u8::from(out.diverged)), Relation::Le, 0.0);
    if out.guarantees_hold {
        let ratio = out
            .ledger
            .diff_ratios(RATIO_FLOOR * scale)
            .into_iter()
            .map(|(_, r)| r)
            .fold(0.0, f64::max);
        rec.check("picard.contraction_ratio", ratio, Relation::Le, CONTRACTION_LIMIT);
        rec.check(
            "picard.wedge_budget",
            out.ledger.max_wedge_norm(),
            Relation::Le,
            (1.0 + BUDGET_SLACK) * s.a,
        );
        let geometric = out
            .ledger
            .entries
            .iter()
            .map(|e| e.diff_norm.max(e.wedge_diff_norm) * 2f64.powi(e.k as i32) / s.a)
            .fold(0.0, f64::max);
        rec.check("picard.geometric_bound", geometric, Relation::Le, 1.0 + BUDGET_SLACK);
    } else {
        rec.note(format!(
            "contraction guarantees void: T = {:e}, data norm {scale:e}, K = {:e}; iteration run in research mode",
            s.t, s.k
        ));
    }
    rec.write_text("ledger", "ledger.csv", &out.ledger.to_csv())?;
    if p.snapshots {
        let last = out.solution.intervals();
        write_field(&rec.path("u_initial"), out.solution.snapshot(0)?)?;
        write_field(&rec.path("u_final"), out.solution.snapshot(last)?)?;
        for stem in ["u_initial", "u_final"] {
            rec.artifact(format!("{stem}.payload"), &format!("{stem}.bin"));
            rec.artifact(format!("{stem}.sidecar"), &format!("{stem}.json"));
        }
    }
    if p.oracle {
        let dt = p.cfl_fraction * cfl_step(&grid);
        let oracle = leapfrog_oracle(&data, s.t, dt, p.intervals)?;
        let discrepancy = oracle.sub(&out.solution)?.c0_norm(1.5);
        let h = s.t / p.intervals as f64;
        rec.scalar("oracle.dt", dt);
        rec.check(
            "oracle.discrepancy",
            discrepancy,
            Relation::Le,
            ORACLE_FACTOR * h * h * scale,
        );
        rec.check(
            "oracle.energy_drift",
            energy_drift(&oracle)?,
            Relation::Le,
            p.energy_drift_tolerance,
        );
    }
    Ok(())
}

fn kernel_row(source: &str, s: &KernelSample) -> String {
    format!(
        "{source},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
        s.xi[0], s.xi[1], s.tau, s.omega[0], s.omega[1], s.rho, s.drho_dtau, s.quotient
    )
}

fn verify_kernel(p: &KernelParams, seed: u64, rec: &mut Recorder) -> Result<()> {
    let mc = monte_carlo_scan(p.samples, seed, &p.ranges, p.tolerance)?;
    let lattice = lattice_scan(p.lattice, &p.ranges, p.tolerance)?;
    let mut csv = String::from("source,xi1,xi2,tau,omega1,omega2,rho,drho_dtau,quotient\n");
    for (source, r) in [("monte_carlo", &mc), ("lattice", &lattice)] {
        record_scan(rec, source, r, p);
        if let Some(s) = &r.argmax {
            csv.push_str(&kernel_row(source, s));
        }
    }
    rec.write_text("kernel_extremes", "kernel_extremes.csv", &csv)?;
    #[derive(Serialize)]
    struct Scans<'a> {
        monte_carlo: &'a ScanReport,
        lattice: &'a ScanReport,
    }
    write_json(
        rec,
        "kernel_scans",
        "kernel_scans.json",
        &Scans {
            monte_carlo: &mc,
            lattice: &lattice,
        },
    )
}

fn record_scan(rec: &mut Recorder, source: &str, r: &ScanReport, p: &KernelParams) {
    let name = |s: &str| format!("kernel.{source}.{s}");
    rec.scalar(name("samples"), r.samples as f64);
    rec.scalar(name("max_quotient"), r.max_quotient);
    rec.scalar(name("max_denominator_error"), r.max_denominator_error);
    rec.scalar(name("max_decomposition_error"), r.max_decomposition_error);
    rec.scalar(name("min_rho"), r.min_rho);
    rec.check(name("max_quotient"), r.max_quotient, Relation::Le, 0.5 + p.tolerance);
    rec.check(name("violations"), r.violations as f64, Relation::Le, 0.0);
    rec.check(name("failures"), r.failures as f64, Relation::Le, 0.0);
    rec.check(
        name("change_of_variables"),
        r.max_identity_error,
        Relation::Le,
        p.identity_tolerance,
    );
    rec.check(
        name("jacobian_fd"),
        r.max_jacobian_fd_error,
        Relation::Le,
        p.jacobian_tolerance,
    );
    rec.check(name("min_jacobian"), r.min_jacobian, Relation::Gt, 0.0);
}

fn constant(p: &ConstantParams, seed: u64, rec: &mut Recorder) -> Result<()> {
    let estimate = estimate_constant(&p.options(seed))?;
    rec.scalar("constant.empirical_c", estimate.empirical_c);
    rec.scalar("constant.mixed_to_plus_ratio", estimate.mixed_to_plus_ratio);
    for stats in &estimate.pairs {
        let name = |s: &str| format!("constant.{}.{s}", stats.pair);
        for (s, v) in [
            ("max", stats.max),
            ("mean", stats.mean),
            ("median", stats.median),
            ("q90", stats.q90),
            ("min", stats.min),
        ] {
            rec.scalar(name(s), v);
        }
        rec.check(name("finite"), stats.max, Relation::Lt, f64::MAX);
        rec.check(name("positive"), stats.min, Relation::Gt, 0.0);
    }
    rec.check(
        "constant.safety_factor",
        2.0 * estimate.empirical_c,
        Relation::Le,
        p.schedule_constant,
    );
    write_json(rec, "constant", "constant.json", &estimate)
}

fn search(p: &SearchParams, seed: u64, rec: &mut Recorder) -> Result<()> {
    let suite = falsification_suite(seed, p.runs, &p.options)?;
    let converged: Vec<_> = suite.runs.iter().filter(|r| r.converged).collect();
    rec.scalar("search.runs", suite.runs.len() as f64);
    rec.scalar("search.converged", suite.converged as f64);
    rec.scalar(
        "search.max_converged_residual",
        converged.iter().map(|r| r.residual_rms).fold(0.0, f64::max),
    );
    rec.scalar(
        "search.max_converged_gradient",
        converged.iter().map(|r| r.gradient_norm).fold(0.0, f64::max),
    );
    rec.check(
        "search.nontrivial_converged",
        suite.nontrivial_converged as f64,
        Relation::Le,
        0.0,
    );
    for r in suite.runs.iter().filter(|r| !r.converged) {
        rec.note(format!(
            "run {} stopped after {} iterations at residual rms {:e}",
            r.index, r.iterations, r.residual_rms
        ));
    }
    rec.note(format!("regularity: {}", suite.regularity));
    write_json(rec, "search", "search.json", &suite.runs)?;
    let grid = PolarGrid::new(p.options.radial_nodes, p.options.theta_nodes)?;
    let basis = p.options.basis()?;
    for r in &suite.runs {
        if let (Some(c), Classification::Nontrivial) = (&r.counterexample, r.classification) {
            let v = basis.profile(&grid, c)?;
            let stem = format!("counterexample_{}", r.index);
            save_profile(rec, &stem, &v)?;
        }
    }
    if p.identities {
        reference_profiles(p, &grid, rec)?;
    }
    Ok(())
}

fn save_profile(rec: &mut Recorder, stem: &str, v: &SelfSimilarProfile) -> Result<()> {
    write_profile(&rec.path(stem), v)?;
    rec.artifact(format!("{stem}.payload"), &format!("{stem}.bin"));
    rec.artifact(format!("{stem}.sidecar"), &format!("{stem}.json"));
    let mut csv = Vec::new();
    identity_to_csv(v, &mut csv)?;
    let file = format!("{stem}_identity.csv");
    rec.write_text(&format!("{stem}.identity"), &file, &String::from_utf8_lossy(&csv))
}

/// The line-valued harmonic profile `(Re z² + Im z³)·e`, `z = σe^{iθ}`,
/// and the disc map `(ρ cos θ, ρ sin θ, 0)` with its hand value
/// `I(½) = -π/8`.
fn reference_profiles(p: &SearchParams, grid: &std::sync::Arc<PolarGrid>, rec: &mut Recorder) -> Result<()> {
    let e = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
    let harmonic = SelfSimilarProfile::from_fn(grid, Parametrization::Sigma, |s, t| {
        let phi = s * s * (2.0 * t).cos() + s.powi(3) * (3.0 * t).sin();
        e.map(|c| c * phi)
    })?;
    let residual = reduced_residual(&harmonic)?.max_abs();
    let spread = identity_spread(&harmonic, 0.0);
    rec.scalar("identities.harmonic.gradient_norm", harmonic.gradient_norm());
    rec.check("identities.harmonic.residual", residual, Relation::Le, REFERENCE_RESIDUAL);
    if residual <= REFERENCE_RESIDUAL {
        rec.check("identities.harmonic.spread", spread, Relation::Le, p.identity_tolerance);
    }
    save_profile(rec, "profile_harmonic", &harmonic)?;
    let disc = SelfSimilarProfile::from_fn(grid, Parametrization::Rho, |r, t| [r * t.cos(), r * t.sin(), 0.0])?;
    let value = identity_integral(&disc, 0.5)?;
    rec.scalar("identities.disc.value_at_half", value);
    rec.check(
        "identities.disc.hand_value",
        (value + PI / 8.0).abs(),
        Relation::Le,
        HAND_VALUE_TOLERANCE,
    );
    Ok(())
}

fn continuity(p: &ContinuityParams, seed: u64, rec: &mut Recorder) -> Result<()> {
    let grid = Grid::new(p.n, p.box_length)?;
    let data = build_data(&p.data, &grid, seed, p.data_norm)?;
    let perturbation = CauchyData::from_spec(&p.perturbation, &grid, seed.wrapping_add(1))?;
    if perturbation.norm() == 0.0 {
        return Err(Error::param("perturbation", "has zero norm"));
    }
    let schedule = make_schedule(p.k, p.c)?;
    record_schedule(rec, &schedule);
    rec.scalar("data.norm", data.norm());
    let largest = p.epsilons.iter().copied().fold(0.0, f64::max);
    rec.check("continuity.data_within_K", data.norm() + largest, Relation::Le, p.k);
    let mut reports = Vec::new();
    for &eps in &p.epsilons {
        let r = continuity_experiment(&data, &perturbation, eps, &schedule, &p.picard_options())?;
        let name = |s: &str| format!("continuity.eps={eps:e}.{s}");
        rec.scalar(name("difference"), r.difference);
        rec.scalar(name("ratio"), r.ratio);
        rec.check(name("bound"), r.difference, Relation::Le, (1.0 + p.slack) * r.bound);
        reports.push(r);
    }
    write_json(rec, "continuity", "continuity.json", &reports)
}
