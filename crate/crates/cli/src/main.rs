//! `tfcd`: solve, convergence studies and property checks.
//!
//! Exit status: 0 on success, 1 on usage or runtime errors, 2 when a
//! numerical check or tolerance fails.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use tfcd_core::properties::{
    rho_positive_bound_sweep, rho_sweep, stability_sweep, telescoping_sweep,
    weight_inequality_sweep, PropertyReport, RHO_CLAIMED_BOUNDS,
};
use tfcd_core::{
    convergence_study, error_norms, solve, LevelSelection, ManufacturedProblem, SpatialMesh,
    StudyParams, TemporalMesh,
};

use config::{LevelList, Options, RunConfig, Workflow};

const EXIT_USAGE: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "tfcd", version, about = "Compact ADI solver for time-fractional convection-diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a manufactured problem and write `t,x,y,u` rows.
    #[command(allow_negative_numbers = true)]
    Solve(Options),
    /// Refinement study in time or space.
    #[command(allow_negative_numbers = true)]
    Convergence(Options),
    /// Property sweeps of the weights, the ratio factor, telescoping and stability.
    #[command(allow_negative_numbers = true)]
    Check(Options),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (workflow, options) = match cli.command {
        Command::Solve(o) => (Workflow::Solve, o),
        Command::Convergence(o) => (Workflow::Convergence, o),
        Command::Check(o) => (Workflow::Check, o),
    };
    let config = match RunConfig::resolve(workflow, options) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Returns whether every check passed.
fn run(config: &RunConfig) -> Result<bool> {
    if let Some(threads) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    match config.workflow {
        Workflow::Solve => cmd_solve(config),
        Workflow::Convergence => cmd_convergence(config),
        Workflow::Check => cmd_check(config),
    }
}

fn write_output(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn manufactured(config: &RunConfig) -> Result<ManufacturedProblem> {
    Ok(ManufacturedProblem::by_name(
        &config.problem,
        config.alpha,
        config.length,
        config.final_time,
        config.coefficients,
    )?)
}

fn cmd_solve(config: &RunConfig) -> Result<bool> {
    let problem = manufactured(config)?;
    let tmesh = TemporalMesh::fitted(&config.mesh_params()).context("invalid time mesh")?;
    let smesh = SpatialMesh::new(config.mx, config.my, config.length)?;
    let selection = match &config.levels {
        LevelList::All => LevelSelection::All,
        LevelList::Final => LevelSelection::Final,
        LevelList::Values(v) => LevelSelection::Indices(v.clone()),
    };
    let levels = solve(&problem.spec, &tmesh, &smesh, &selection).context("solver failed")?;

    let mut csv = String::from("t,x,y,u\n");
    for level in &levels {
        for m in 0..=smesh.mx() {
            for n in 0..=smesh.my() {
                writeln!(
                    csv,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    level.time,
                    smesh.x(m),
                    smesh.y(n),
                    level.u[(m, n)]
                )?;
            }
        }
    }
    write_output(config, &csv)?;

    match levels.iter().max_by_key(|l| l.level) {
        Some(level) => {
            let e = error_norms(&level.u, |x, y, t| problem.exact(x, y, t), level.time);
            eprintln!(
                "{} problem, level {} (t = {}): L2 error {:.6e}, max error {:.6e}",
                problem.name, level.level, level.time, e.l2, e.max
            );
        }
        None => eprintln!("{} problem: {} level(s) written", problem.name, levels.len()),
    }
    Ok(true)
}

fn cmd_convergence(config: &RunConfig) -> Result<bool> {
    let problem = manufactured(config)?;
    let LevelList::Values(levels) = &config.levels else {
        unreachable!("validated");
    };
    let mut params = match config.axis {
        tfcd_core::Axis::Temporal => StudyParams::temporal(levels.clone(), config.theta, config.mx),
        tfcd_core::Axis::Spatial => StudyParams::spatial(levels.clone(), config.theta, config.nt),
    };
    if config.split_time < config.final_time {
        params.split_time = Some(config.split_time);
        params.graded_fraction = config.graded_fraction;
    }
    let report = convergence_study(&problem, &params).context("convergence study failed")?;
    write_output(config, &report.to_csv())?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    let observed = report.finest_order().unwrap_or(f64::NAN);
    let passed = (observed - report.predicted).abs() <= config.tolerance;
    eprintln!(
        "{} {} study: predicted order {:.4}, observed {:.4} at the finest pair: {} (tolerance {})",
        problem.name,
        config.axis.name(),
        report.predicted,
        observed,
        if passed { "PASS" } else { "FAIL" },
        config.tolerance
    );
    Ok(passed)
}

fn cmd_check(config: &RunConfig) -> Result<bool> {
    let seed = config.seed;
    let mut reports: Vec<PropertyReport> = weight_inequality_sweep(1000, seed)?;
    let (lower, upper) = RHO_CLAIMED_BOUNDS;
    reports.push(rho_sweep(10_000, seed, lower, upper)?);
    reports.push(rho_positive_bound_sweep(10_000, seed)?);
    reports.extend(telescoping_sweep(300, seed)?);
    reports.push(stability_sweep(50, seed)?);

    let mut text = String::new();
    for r in &reports {
        writeln!(text, "{r}")?;
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    writeln!(
        text,
        "{}: {} of {} properties passed",
        if failed == 0 { "PASS" } else { "FAIL" },
        reports.len() - failed,
        reports.len()
    )?;
    write_output(config, &text)?;
    Ok(failed == 0)
}
