use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nxfem::bench::{emit_outputs, read_config_file, run_sweep, Example, SweepConfig};
use nxfem::Error;

#[derive(Parser)]
#[command(name = "nxfem-bench", about = "Interface-problem benchmarks: errors, condition numbers, solver iterations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smooth solution with a straight interface and unit coefficients.
    Example1(Opts),
    /// Circular interface, f = -4 a1 a2.
    Example2(Opts),
    /// Circular interface, f = -4.
    Example3(Opts),
    /// Parallel straight interfaces.
    Multi(Opts),
}

#[derive(Args)]
struct Opts {
    /// Variant list (ev, lo, gp) or "all".
    #[arg(long)]
    variant: Option<String>,
    /// Comma-separated coefficient values of subdomain 1.
    #[arg(long)]
    alpha1: Option<String>,
    /// Comma-separated coefficient values of subdomain 2.
    #[arg(long)]
    alpha2: Option<String>,
    /// Hierarchy depth.
    #[arg(long)]
    levels: Option<usize>,
    /// Finest level(s): "3", "1,2" or "1..3".
    #[arg(long)]
    finest: Option<String>,
    /// cg-jacobi, cg-sgs, cg-smg, smg or direct (comma-separated for several).
    #[arg(long)]
    solver: Option<String>,
    /// Cells per side of the coarsest mesh.
    #[arg(long)]
    ncoarse: Option<usize>,
    /// Interface counts for the multi example.
    #[arg(long)]
    interfaces: Option<String>,
    /// Output directory for the CSV and SVG files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative energy-norm residual at which iterative solvers stop
    #[arg(long)]
    tol: Option<f64>,
    /// Estimate the condition number.
    #[arg(long)]
    kappa: bool,
    /// Allow finest levels L4 and L5.
    #[arg(long)]
    l5: bool,
    /// Skip the error norms.
    #[arg(long)]
    no_errors: bool,
    /// Worker threads for the sweep.
    #[arg(long)]
    jobs: Option<usize>,
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Opts {
    fn settings(&self) -> Result<BTreeMap<String, String>, Error> {
        let mut m = match &self.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        set("variant", self.variant.clone());
        set("alpha1", self.alpha1.clone());
        set("alpha2", self.alpha2.clone());
        set("levels", self.levels.map(|x| x.to_string()));
        set("finest", self.finest.clone());
        set("solver", self.solver.clone());
        set("ncoarse", self.ncoarse.map(|x| x.to_string()));
        set("interfaces", self.interfaces.clone());
        set("out", self.out.as_ref().map(|p| p.display().to_string()));
        set("tol", self.tol.map(|x| x.to_string()));
        set("jobs", self.jobs.map(|x| x.to_string()));
        set("kappa", self.kappa.then(|| "true".into()));
        set("l5", self.l5.then(|| "true".into()));
        set("errors", self.no_errors.then(|| "false".into()));
        Ok(m)
    }
}

fn run(example: Example, opts: &Opts) -> Result<(), Error> {
    let sweep = SweepConfig::from_settings(example, &opts.settings()?)?;
    let rows = run_sweep(&sweep)?;
    for p in emit_outputs(&rows, &sweep.out, example.name())? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (example, opts) = match &cli.command {
        Command::Example1(o) => (Example::One, o),
        Command::Example2(o) => (Example::Two, o),
        Command::Example3(o) => (Example::Three, o),
        Command::Multi(o) => (Example::Multi, o),
    };
    match run(example, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::NotConverged { .. } | Error::Breakdown { .. } | Error::EigenNotConverged { .. } => 3,
                Error::NotPositiveDefinite { .. } | Error::ZeroDiagonal(_) => 3,
                _ => 1,
            })
        }
    }
}
