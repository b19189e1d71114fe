//! Discretization of a problem on a level hierarchy, solvers and condition numbers.

use std::fmt;
use std::str::FromStr;

use log::info;

use crate::error::{Error, Result};
use crate::krylov::{cg, JacobiPreconditioner, MultigridPreconditioner, SgsPreconditioner, SolveReport};
use crate::linalg::{extremal_eigs, extremal_eigs_with_inverse, sparse_direct_solve, DIRECT_INVERSE_LIMIT};
use crate::mesh::{classify_and_cut, CutDecomposition, StructuredMesh, DEFAULT_SNAP_TOL};
use crate::multigrid::{self, solve_stationary, MgHierarchy, SmootherConfig};
use crate::nitsche::{assemble_system, compute_errors, Assembled, ErrorNorms, NitscheConfig, Variant};
use crate::space::{build_space, EnrichedSpace};
use crate::transfer::{assemble_transfer, build_biorthogonal, LevelView, TransferOperator};

use super::problems::Problem;

/// Cells per side of level L1.
pub const L1_CELLS: usize = 100;

/// Deepest hierarchy when the finest mesh is not a refinement of L1.
pub const MAX_DEFAULT_DEPTH: usize = 5;

/// Cells per side of level `Lk`, `k >= 1`.
pub fn cells_for_level(level: usize) -> usize {
    assert!(level >= 1);
    L1_CELLS << (level - 1)
}

/// Hierarchy depth whose coarsest level is L1 (at least two levels). Other
/// meshes get the deepest hierarchy (at most five levels) with an integer
/// coarse cell count.
pub fn default_depth(n_finest: usize) -> usize {
    if n_finest % L1_CELLS == 0 && (n_finest / L1_CELLS).is_power_of_two() {
        return ((n_finest / L1_CELLS).trailing_zeros() as usize + 1).max(2);
    }
    let mut d = 1;
    while d < MAX_DEFAULT_DEPTH && n_finest % (1 << d) == 0 {
        d += 1;
    }
    d
}

#[derive(Debug, Clone)]
pub struct Level {
    pub mesh: StructuredMesh,
    pub decomp: CutDecomposition,
    pub space: EnrichedSpace,
}

impl Level {
    pub fn new(problem: &Problem, n: usize) -> Result<Self> {
        let mesh = StructuredMesh::new(n);
        let decomp = classify_and_cut(&mesh, &problem.interfaces, DEFAULT_SNAP_TOL)?;
        let space = build_space(&mesh, &decomp);
        Ok(Self { mesh, decomp, space })
    }

    pub fn view(&self) -> LevelView<'_> {
        LevelView {
            mesh: &self.mesh,
            decomp: &self.decomp,
            space: &self.space,
        }
    }
}

/// Levels of a `depth`-level hierarchy ending at `n_finest` cells per side, coarse to fine.
pub fn build_levels(problem: &Problem, n_finest: usize, depth: usize) -> Result<Vec<Level>> {
    if depth == 0 || n_finest % (1 << (depth - 1)) != 0 {
        return Err(Error::Config(format!("{n_finest} cells per side cannot be coarsened {depth} times")));
    }
    let n_coarse = n_finest >> (depth - 1);
    (0..depth).map(|l| Level::new(problem, n_coarse << l)).collect()
}

/// Pseudo-L2 prolongations between consecutive levels.
pub fn build_transfers(levels: &[Level]) -> Result<Vec<TransferOperator>> {
    levels
        .windows(2)
        .map(|w| {
            let basis = build_biorthogonal(&w[1].mesh, &w[1].decomp);
            assemble_transfer(w[0].view(), w[1].view(), &basis)
        })
        .collect()
}

/// Finest-level system of one problem and variant, with the background levels below it.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub problem: Problem,
    pub config: NitscheConfig,
    pub levels: Vec<Level>,
    pub system: Assembled,
}

impl Discretization {
    pub fn new(problem: &Problem, variant: Variant, n_finest: usize, depth: usize) -> Result<Self> {
        let levels = build_levels(problem, n_finest, depth)?;
        let config = NitscheConfig::new(variant);
        let f = levels.last().expect("depth >= 1");
        let system = assemble_system(&f.mesh, &f.decomp, &f.space, &problem.coeffs, &config)?;
        Ok(Self {
            problem: problem.clone(),
            config,
            levels,
            system,
        })
    }

    pub fn finest(&self) -> &Level {
        self.levels.last().expect("depth >= 1")
    }

    pub fn num_dofs(&self) -> usize {
        self.finest().space.num_dofs()
    }

    pub fn hierarchy(&self, smoother: SmootherConfig) -> Result<MgHierarchy> {
        if self.levels.len() < 2 {
            return Err(Error::Config("multigrid needs a hierarchy of at least two levels".into()));
        }
        multigrid::setup(self.system.matrix.clone(), build_transfers(&self.levels)?, smoother)
    }

    pub fn errors(&self, u: &[f64]) -> Result<ErrorNorms> {
        let f = self.finest();
        compute_errors(&f.mesh, &f.decomp, &f.space, &self.problem.coeffs, &self.system.weights, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Direct,
    CgJacobi,
    CgSgs,
    CgSmg,
    Smg,
}

impl SolverKind {
    pub const ITERATIVE: [SolverKind; 4] = [SolverKind::CgJacobi, SolverKind::CgSgs, SolverKind::CgSmg, SolverKind::Smg];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Direct => "direct",
            SolverKind::CgJacobi => "cg-jacobi",
            SolverKind::CgSgs => "cg-sgs",
            SolverKind::CgSmg => "cg-smg",
            SolverKind::Smg => "smg",
        }
    }

    pub fn uses_multigrid(self) -> bool {
        matches!(self, SolverKind::CgSmg | SolverKind::Smg)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(SolverKind::Direct),
            "cg-jacobi" | "jacobi" => Ok(SolverKind::CgJacobi),
            "cg-sgs" | "sgs" => Ok(SolverKind::CgSgs),
            "cg-smg" => Ok(SolverKind::CgSmg),
            "smg" => Ok(SolverKind::Smg),
            _ => Err(Error::Config(format!(
                "unknown solver '{s}' (expected cg-jacobi, cg-sgs, cg-smg, smg or direct)"
            ))),
        }
    }
}

/// Iteration cap for every iterative solver.
pub const MAX_ITERATIONS: usize = 200_000;

/// Solves the finest-level system. `hierarchy` is built on demand when the solver needs one.
pub fn solve(
    disc: &Discretization,
    solver: SolverKind,
    tol: f64,
    hierarchy: Option<&MgHierarchy>,
) -> Result<(Vec<f64>, SolveReport)> {
    let a = &disc.system.matrix;
    let f = &disc.system.rhs;
    let built;
    let mg = if solver.uses_multigrid() {
        match hierarchy {
            Some(h) => Some(h),
            None => {
                built = disc.hierarchy(SmootherConfig::default())?;
                Some(&built)
            }
        }
    } else {
        None
    };
    let out = match solver {
        SolverKind::Direct => {
            let start = std::time::Instant::now();
            let u = sparse_direct_solve(a, f)?;
            let report = SolveReport {
                converged: true,
                wall_time: start.elapsed().as_secs_f64(),
                ..SolveReport::default()
            };
            (u, report)
        }
        SolverKind::CgJacobi => cg(a, f, &JacobiPreconditioner::new(a)?, tol, MAX_ITERATIONS)?,
        SolverKind::CgSgs => cg(a, f, &SgsPreconditioner::new(a), tol, MAX_ITERATIONS)?,
        SolverKind::CgSmg => cg(a, f, &MultigridPreconditioner::new(mg.expect("built")), tol, MAX_ITERATIONS)?,
        SolverKind::Smg => solve_stationary(mg.expect("built"), f, tol, MAX_ITERATIONS)?,
    };
    info!(
        target: "nxfem::bench",
        "solver={} dofs={} iterations={} rho={:?} time={:.3}s",
        solver,
        f.len(),
        out.1.iterations,
        out.1.rho_star,
        out.1.wall_time
    );
    Ok(out)
}

/// Relative accuracy of the extremal eigenvalue estimates.
pub const KAPPA_TOL: f64 = 1e-6;

/// CG-SMG tolerance for applying the inverse. The Rayleigh quotient error is at
/// most `tol * sqrt(kappa)`; the true residual of high-contrast systems floors
/// near `1e-11`.
const INVERSE_TOL: f64 = 1e-10;

/// Spectral condition number of the finest-level matrix. Systems above the
/// direct-solver limit apply the inverse through CG-SMG.
pub fn condition_number(disc: &Discretization, hierarchy: Option<&MgHierarchy>) -> Result<f64> {
    let a = &disc.system.matrix;
    let (lmin, lmax) = if a.nrows() <= DIRECT_INVERSE_LIMIT {
        extremal_eigs(a, KAPPA_TOL)?
    } else {
        let built;
        let h = match hierarchy {
            Some(h) => h,
            None => {
                built = disc.hierarchy(SmootherConfig::default())?;
                &built
            }
        };
        let pc = MultigridPreconditioner::new(h);
        extremal_eigs_with_inverse(a, KAPPA_TOL, |r| Ok(cg(a, r, &pc, INVERSE_TOL, 1000)?.0))?
    };
    Ok(lmax / lmin)
}
