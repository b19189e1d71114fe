//! Execution of single runs and sweeps.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::info;

use crate::error::{Error, Result};
use crate::multigrid::SmootherConfig;

use super::config::{RunConfig, SweepConfig};
use super::output::BenchmarkRow;
use super::problems::{example1, example2, example3, multi_interface, Example, Problem};
use super::run::{condition_number, solve, Discretization};
use crate::linalg::DIRECT_INVERSE_LIMIT;

pub fn problem_for(cfg: &RunConfig) -> Result<Problem> {
    match cfg.example {
        Example::One => Ok(example1()),
        Example::Two => example2(cfg.alpha1, cfg.alpha2),
        Example::Three => example3(cfg.alpha1, cfg.alpha2),
        Example::Multi => multi_interface(cfg.interfaces),
    }
}

/// Number of element copies: background elements plus one per cut element.
pub fn element_copies(disc: &Discretization) -> usize {
    let f = disc.finest();
    f.mesh.num_elements() + f.decomp.cuts().len()
}

/// Assembles, solves and measures one configuration.
pub fn run_one(cfg: &RunConfig) -> Result<BenchmarkRow> {
    let problem = problem_for(cfg)?;
    let disc = Discretization::new(&problem, cfg.variant, cfg.n_finest(), cfg.depth)?;
    let needs_mg = cfg.solver.uses_multigrid() || (cfg.kappa && disc.num_dofs() > DIRECT_INVERSE_LIMIT);
    let hierarchy = if needs_mg && cfg.depth >= 2 {
        Some(disc.hierarchy(SmootherConfig::default())?)
    } else {
        None
    };
    let (u, report) = solve(&disc, cfg.solver, cfg.tol, hierarchy.as_ref())?;
    let errors = if cfg.errors { Some(disc.errors(&u)?) } else { None };
    let kappa = if cfg.kappa {
        Some(condition_number(&disc, hierarchy.as_ref())?)
    } else {
        None
    };
    let row = BenchmarkRow {
        example: cfg.example.name().to_string(),
        variant: cfg.variant.name().to_string(),
        alpha1: cfg.alpha1,
        alpha2: cfg.alpha2,
        level: cfg.finest,
        depth: cfg.depth,
        solver: cfg.solver.name().to_string(),
        ncoarse: cfg.n_coarse(),
        interfaces: if cfg.example == Example::Multi { cfg.interfaces } else { problem.interfaces.len() },
        tol: cfg.tol,
        dofs: disc.num_dofs(),
        elements: element_copies(&disc),
        l2_error: errors.map(|e| e.l2),
        energy_error: errors.map(|e| e.energy),
        kappa,
        iterations: report.iterations,
        rho_star: report.rho_star,
        wall_time: report.wall_time,
    };
    info!(
        target: "nxfem::bench",
        "{} {} a=({:e},{:e}) L{} dofs={} its={} l2={:?} kappa={:?}",
        row.example,
        row.variant,
        row.alpha1,
        row.alpha2,
        row.level,
        row.dofs,
        row.iterations,
        row.l2_error,
        row.kappa
    );
    Ok(row)
}

/// Runs every configuration on up to `jobs` threads. Rows come back in input order;
/// the first failure (in input order) is returned instead.
pub fn run_all(runs: &[RunConfig], jobs: usize) -> Result<Vec<BenchmarkRow>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<BenchmarkRow>>>> = Mutex::new(runs.iter().map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, runs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= runs.len() {
                    break;
                }
                let r = run_one(&runs[i]);
                results.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.unwrap_or_else(|| Err(Error::Config("run was not executed".into()))))
        .collect()
}

pub fn run_sweep(sweep: &SweepConfig) -> Result<Vec<BenchmarkRow>> {
    run_all(&sweep.runs()?, sweep.jobs)
}

fn expect_example(sweep: &SweepConfig, e: Example) -> Result<()> {
    if sweep.example != e {
        return Err(Error::Config(format!("sweep is for {}, not {e}", sweep.example)));
    }
    Ok(())
}

pub fn run_example1(sweep: &SweepConfig) -> Result<Vec<BenchmarkRow>> {
    expect_example(sweep, Example::One)?;
    run_sweep(sweep)
}

pub fn run_example2(sweep: &SweepConfig) -> Result<Vec<BenchmarkRow>> {
    expect_example(sweep, Example::Two)?;
    run_sweep(sweep)
}

pub fn run_example3(sweep: &SweepConfig) -> Result<Vec<BenchmarkRow>> {
    expect_example(sweep, Example::Three)?;
    run_sweep(sweep)
}

pub fn run_multi_interface(sweep: &SweepConfig) -> Result<Vec<BenchmarkRow>> {
    expect_example(sweep, Example::Multi)?;
    run_sweep(sweep)
}
