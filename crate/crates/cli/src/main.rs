use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmcwave_core::harness::{replay, run, Command, ReplayOptions, RunConfig, RunReport, REPORT_FILE};
use cmcwave_core::Error;

#[derive(Parser)]
#[command(name = "cmcwave", version, about = "Experiments for the CMC wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Constants A, T, B of the contraction argument.
    Schedule(RunArgs),
    /// Picard iteration with ledger, oracle comparison and snapshots.
    Simulate(RunArgs),
    /// Kernel bound and change of variables over random and lattice samples.
    VerifyKernel(RunArgs),
    /// Empirical constant of the bilinear estimate.
    EstimateConstant(RunArgs),
    /// Falsification search for nonconstant self-similar profiles.
    SelfsimilarSearch(RunArgs),
    /// Continuous dependence on the data.
    Continuity(RunArgs),
    /// Re-executes a recorded run and compares every scalar.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; missing parameters take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct ReplayArgs {
    /// Path to a report.json, or the directory holding it.
    report: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// File values first, then command-line flags on top.
fn load_config(command: Command, args: &RunArgs) -> Result<RunConfig, Error> {
    let mut value = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => serde_json::json!({}),
    };
    let map = value
        .as_object_mut()
        .ok_or_else(|| Error::Config("config file must hold a JSON object".into()))?;
    let named = map
        .entry("command")
        .or_insert_with(|| command.as_str().into())
        .clone();
    if named != command.as_str() {
        return Err(Error::Config(format!(
            "command: file says {named}, command line says `{command}`"
        )));
    }
    if let Some(seed) = args.seed {
        map.insert("seed".into(), seed.into());
    }
    if let Some(out) = &args.out {
        map.insert("output".into(), out.display().to_string().into());
    }
    RunConfig::parse(&value.to_string())
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("threads: must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn print_report(report: &RunReport, dir: &std::path::Path) {
    for c in &report.checks {
        let measured = c.measured.map_or("non-finite".to_string(), |m| format!("{m:.6e}"));
        let verdict = if c.passed { "pass" } else { "FAIL" };
        println!(
            "{verdict}  {}  {measured} {} {:.6e}",
            c.name,
            c.relation.as_str(),
            c.threshold
        );
    }
    for n in &report.notes {
        println!("note  {n}");
    }
    println!(
        "{} checks, {} failed, {:.2} s; report at {}",
        report.checks.len(),
        report.failed_checks().count(),
        report.wall_time_seconds,
        dir.join(REPORT_FILE).display()
    );
}

fn usage_or_failure(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

fn execute(cmd: Cmd) -> Result<u8, Error> {
    let (command, args) = match cmd {
        Cmd::Replay(args) => {
            let path = if args.report.is_dir() {
                args.report.join(REPORT_FILE)
            } else {
                args.report.clone()
            };
            let options = ReplayOptions {
                seed: args.seed,
                output: args.out.clone(),
            };
            let outcome = with_threads(args.threads, || replay(&path, &options))??;
            print_report(&outcome.report, &outcome.report.config.output_dir());
            if outcome.config_mismatch {
                println!("config mismatch: {}", outcome.config_differences.join(", "));
            }
            for m in &outcome.scalar_mismatches {
                println!("scalar mismatch  {}  {:?} vs {:?}", m.name, m.original, m.replayed);
            }
            for name in &outcome.check_mismatches {
                println!("check mismatch  {name}");
            }
            println!("reproduced: {}", outcome.reproduced);
            return Ok(if outcome.reproduced && outcome.report.passed { 0 } else { EXIT_FAILED });
        }
        Cmd::Schedule(a) => (Command::Schedule, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::VerifyKernel(a) => (Command::VerifyKernel, a),
        Cmd::EstimateConstant(a) => (Command::EstimateConstant, a),
        Cmd::SelfsimilarSearch(a) => (Command::SelfsimilarSearch, a),
        Cmd::Continuity(a) => (Command::Continuity, a),
    };
    let config = load_config(command, &args)?;
    if args.print_config {
        println!("{}", config.to_json());
        return Ok(0);
    }
    config.validate()?;
    let report = with_threads(args.threads, || run(&config))??;
    print_report(&report, &config.output_dir());
    Ok(if report.passed { 0 } else { EXIT_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(usage_or_failure(&e))
        }
    }
}
