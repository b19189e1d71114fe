//! Semi-geometric multigrid: Galerkin coarse operators and a V-cycle.

use std::time::Instant;

use log::{debug, info};

use crate::error::{Error, Result};
use crate::krylov::{energy_norm, SolveReport};
use crate::linalg::{triple_product, CsrMatrix, SparseCholesky};
use crate::transfer::{transfer_apply, transfer_apply_transposed, TransferOperator};

/// Largest coarsest-level system handed to the direct solver.
pub const COARSE_LIMIT: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherKind {
    Jacobi,
    SymmetricGaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherConfig {
    pub kind: SmootherKind,
    /// Pre- and post-smoothing steps.
    pub sweeps: usize,
    /// Jacobi damping factor.
    pub damping: f64,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            kind: SmootherKind::SymmetricGaussSeidel,
            sweeps: 3,
            damping: 2.0 / 3.0,
        }
    }
}

fn diagonal_checked(a: &CsrMatrix) -> Result<Vec<f64>> {
    let d = a.diagonal();
    match d.iter().position(|&x| x == 0.0) {
        Some(i) => Err(Error::ZeroDiagonal(i)),
        None => Ok(d),
    }
}

fn gauss_seidel_row(a: &CsrMatrix, diag: &[f64], x: &mut [f64], b: &[f64], i: usize) {
    let (cols, vals) = a.row(i);
    let mut s = b[i];
    for (&j, &v) in cols.iter().zip(vals) {
        if j != i {
            s -= v * x[j];
        }
    }
    x[i] = s / diag[i];
}

/// `sweeps` smoothing steps on `A x = b`, in place. One symmetric Gauss-Seidel
/// step is a forward sweep followed by a backward sweep.
pub fn smooth(a: &CsrMatrix, x: &mut [f64], b: &[f64], config: &SmootherConfig, sweeps: usize) -> Result<()> {
    let diag = diagonal_checked(a)?;
    smooth_with_diag(a, &diag, x, b, config, sweeps)
}

fn smooth_with_diag(
    a: &CsrMatrix,
    diag: &[f64],
    x: &mut [f64],
    b: &[f64],
    config: &SmootherConfig,
    sweeps: usize,
) -> Result<()> {
    let n = a.nrows();
    if x.len() != n || b.len() != n {
        return Err(Error::dims("smoother vectors do not match the matrix"));
    }
    match config.kind {
        SmootherKind::SymmetricGaussSeidel => {
            for _ in 0..sweeps {
                for i in 0..n {
                    gauss_seidel_row(a, diag, x, b, i);
                }
                for i in (0..n).rev() {
                    gauss_seidel_row(a, diag, x, b, i);
                }
            }
        }
        SmootherKind::Jacobi => {
            let mut ax = vec![0.0; n];
            for _ in 0..sweeps {
                a.spmv_into(x, &mut ax);
                for i in 0..n {
                    x[i] += config.damping * (b[i] - ax[i]) / diag[i];
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct MgLevel {
    a: CsrMatrix,
    diag: Vec<f64>,
}

/// Operators of every level (0 = coarsest) and the transfers between them.
#[derive(Debug, Clone)]
pub struct MgHierarchy {
    levels: Vec<MgLevel>,
    /// `transfers[l]` prolongates from level `l` to level `l + 1`
    transfers: Vec<TransferOperator>,
    coarse: SparseCholesky,
    smoother: SmootherConfig,
}

/// Builds `A_{l-1} = T^T A_l T` down the chain and factors the coarsest operator.
/// `transfers` are ordered coarse to fine and end at the level of `a_fine`.
pub fn setup(a_fine: CsrMatrix, transfers: Vec<TransferOperator>, smoother: SmootherConfig) -> Result<MgHierarchy> {
    if transfers.is_empty() {
        return Err(Error::Config("multigrid needs at least two levels".into()));
    }
    let start = Instant::now();
    let mut ops = vec![a_fine];
    for t in transfers.iter().rev() {
        let fine = ops.last().expect("non-empty");
        if t.fine_dim() != fine.nrows() {
            return Err(Error::dims("transfer does not match the level operator"));
        }
        ops.push(triple_product(fine, &t.matrix)?);
    }
    ops.reverse();
    let n0 = ops[0].nrows();
    if n0 > COARSE_LIMIT {
        return Err(Error::Config(format!(
            "coarsest level has {n0} dofs; the direct solver is limited to {COARSE_LIMIT}"
        )));
    }
    let coarse = SparseCholesky::new(&ops[0])?;
    let levels = ops
        .into_iter()
        .map(|a| {
            let diag = diagonal_checked(&a)?;
            Ok(MgLevel { a, diag })
        })
        .collect::<Result<Vec<_>>>()?;
    info!(
        target: "nxfem::multigrid",
        "levels={} sizes={:?} coarse_profile={} setup={:.3}s",
        levels.len(),
        levels.iter().map(|l| l.a.nrows()).collect::<Vec<_>>(),
        coarse.profile(),
        start.elapsed().as_secs_f64()
    );
    Ok(MgHierarchy {
        levels,
        transfers,
        coarse,
        smoother,
    })
}

impl MgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn operator(&self, l: usize) -> &CsrMatrix {
        &self.levels[l].a
    }

    pub fn finest(&self) -> &CsrMatrix {
        &self.levels.last().expect("non-empty").a
    }

    pub fn transfer(&self, l: usize) -> &TransferOperator {
        &self.transfers[l]
    }

    pub fn smoother(&self) -> &SmootherConfig {
        &self.smoother
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).collect()
    }

    fn cycle(&self, l: usize, r: &[f64]) -> Result<Vec<f64>> {
        if l == 0 {
            return self.coarse.solve(r);
        }
        let lv = &self.levels[l];
        let nu = self.smoother.sweeps;
        let mut c = vec![0.0; r.len()];
        smooth_with_diag(&lv.a, &lv.diag, &mut c, r, &self.smoother, nu)?;
        let mut res = vec![0.0; r.len()];
        lv.a.spmv_into(&c, &mut res);
        res.iter_mut().zip(r).for_each(|(x, b)| *x = b - *x);
        let rc = transfer_apply_transposed(&self.transfers[l - 1], &res)?;
        let cc = self.cycle(l - 1, &rc)?;
        let corr = transfer_apply(&self.transfers[l - 1], &cc)?;
        c.iter_mut().zip(&corr).for_each(|(x, y)| *x += y);
        smooth_with_diag(&lv.a, &lv.diag, &mut c, r, &self.smoother, nu)?;
        Ok(c)
    }
}

/// One V-cycle for the finest-level residual `r`, starting from a zero correction.
pub fn v_cycle(h: &MgHierarchy, r: &[f64]) -> Result<Vec<f64>> {
    if r.len() != h.finest().nrows() {
        return Err(Error::dims("residual does not match the finest level"));
    }
    h.cycle(h.num_levels() - 1, r)
}

/// Multigrid as a stationary iteration `u <- u + V(f - A u)` from `u = 0`.
pub fn solve_stationary(h: &MgHierarchy, f: &[f64], tol: f64, max_iters: usize) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let a = h.finest();
    let n = a.nrows();
    if f.len() != n {
        return Err(Error::dims("rhs does not match the finest level"));
    }
    let mut report = SolveReport::default();
    let mut u = vec![0.0; n];
    let norm0 = energy_norm(a, f);
    if norm0 == 0.0 {
        report.converged = true;
        report.wall_time = start.elapsed().as_secs_f64();
        return Ok((u, report));
    }
    let mut r = f.to_vec();
    for k in 1..=max_iters {
        let c = v_cycle(h, &r)?;
        u.iter_mut().zip(&c).for_each(|(x, y)| *x += y);
        report.increments.push(energy_norm(a, &c));
        a.spmv_into(&u, &mut r);
        r.iter_mut().zip(f).for_each(|(x, b)| *x = b - *x);
        let rel = energy_norm(a, &r) / norm0;
        report.residuals.push(rel);
        report.iterations = k;
        debug!(target: "nxfem::multigrid", "iteration={k} residual={rel:.3e}");
        if rel < tol {
            report.converged = true;
            break;
        }
    }
    report.rho_star = crate::krylov::estimate_rho_star(&report.increments);
    report.wall_time = start.elapsed().as_secs_f64();
    if !report.converged {
        return Err(Error::NotConverged { report: Box::new(report) });
    }
    Ok((u, report))
}
