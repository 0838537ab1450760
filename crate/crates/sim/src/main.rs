use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use irs_core::conic::{text, ConicSolver, SolverSettings};
use irs_core::model::NetworkConfig;
use irs_sim::checks::{run_suite, Suite};
use irs_sim::config::{load_config, to_json};
use irs_sim::harness::{parse_grid, parse_schemes, run_sweep, ExperimentSpec, Figure};
use irs_sim::output::write_outputs;

#[derive(Parser)]
#[command(name = "irs-sim", version, about = "Module selection and resource allocation sweeps for modular IRS networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over the sparsity budget.
    Simulate {
        /// Network config (JSON). Defaults to the built-in reference scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Budget grid, `lo:hi:step` or a comma list.
        #[arg(long, default_value = "4.5:6.5:0.25")]
        deltas: String,
        #[arg(long, default_value_t = 200)]
        realizations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "proposed,mrs,no_irs")]
        schemes: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write bisection and alternating-optimization traces.
        #[arg(long)]
        debug: bool,
        /// Worker threads (0 = one per core). Output does not depend on it.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Property and oracle batteries.
    Check {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Instances per check.
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Solve a problem in the conic text format and print the result.
    SolveConic {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Print the reference scenario as a JSON config.
    ReferenceConfig,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Invariants,
    Oracle,
}

fn simulate(
    config: Option<PathBuf>,
    deltas: &str,
    realizations: usize,
    seed: u64,
    schemes: &str,
    out: PathBuf,
    debug: bool,
) -> Result<()> {
    let cfg = match config {
        Some(path) => load_config(&path)?,
        None => NetworkConfig::reference(5, 10, 20),
    };
    let mut spec = ExperimentSpec::new(cfg, parse_grid(deltas)?, realizations, seed);
    spec.schemes = parse_schemes(schemes)?;
    spec.output_dir = out;
    spec.debug = debug;
    spec.validate()?;
    let above = spec.deltas_above_bound();
    if !above.is_empty() {
        eprintln!("note: {} budget(s) exceed the upper bound of the useful range", above.len());
    }
    let start = Instant::now();
    let result = run_sweep(&spec)?;
    let agg = write_outputs(&spec, &result)?;
    eprintln!(
        "{} records in {:.1} s -> {}",
        result.records.len(),
        start.elapsed().as_secs_f64(),
        spec.output_dir.display()
    );
    for (scheme, count) in &agg.failures {
        eprintln!("warning: {count} failed {scheme} records (excluded from averages)");
    }
    println!("scheme,delta,min_sinr,active_modules,transmit_power_w,ee");
    let rows = |f| agg.rows(f).iter();
    for (((a, b), c), d) in rows(Figure::MinSinr)
        .zip(rows(Figure::ActiveModules))
        .zip(rows(Figure::TransmitPower))
        .zip(rows(Figure::EnergyEfficiency))
    {
        println!("{},{},{:.6},{:.3},{:.6},{:.6}", a.scheme, a.delta, a.mean, b.mean, c.mean, d.mean);
    }
    Ok(())
}

fn solve_conic(input: PathBuf, tol: f64) -> Result<()> {
    let src = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
    let problem = text::parse_problem(&src)?;
    let mut solver = ConicSolver::new(SolverSettings {
        tol_feas: tol,
        tol_gap: tol,
        ..SolverSettings::default()
    });
    let report = solver.solve(&problem)?;
    println!("status {}", report.status);
    println!("objective {}", report.objective_value);
    println!("iterations {}", report.iterations);
    println!("max_primal_residual {:e}", report.max_primal_residual);
    println!("max_cone_violation {:e}", report.max_cone_violation);
    for (i, v) in report.x.iter().enumerate() {
        println!("x[{i}] {v}");
    }
    Ok(())
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Simulate {
            config,
            deltas,
            realizations,
            seed,
            schemes,
            out,
            debug,
            threads,
        } => {
            if threads > 0 {
                rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
            }
            simulate(config, &deltas, realizations, seed, &schemes, out, debug)?;
        }
        Command::Check { suite, instances, seed } => {
            let suite = match suite {
                SuiteArg::Invariants => Suite::Invariants,
                SuiteArg::Oracle => Suite::Oracle,
            };
            let results = run_suite(suite, instances, seed);
            let mut ok = true;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                ok &= r.passed;
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::SolveConic { input, tol } => solve_conic(input, tol)?,
        Command::ReferenceConfig => println!("{}", to_json(&NetworkConfig::reference(5, 10, 20))),
    }
    Ok(ExitCode::SUCCESS)
}
