//! Variational prolongations between consecutive enriched spaces.
//!
//! For fine dof `p` in copy `i` the transfer solves the weak equality
//! `(theta_p, T v)_{Omega_i} = (theta_p, v)_{Omega_i}` element by element over the
//! fine parts whose background parent also carries copy `i`. With the dual
//! (biorthogonal) multiplier `theta_p = psi_p` the fine mass matrix becomes
//! diagonal and `T = D^{-1} B` is sparse.

use log::debug;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseCholesky, DenseMatrix, SparseCholesky};
use crate::mesh::{
    barycentric, quadrature_for_part, signed_area, CutDecomposition, Point, StructuredMesh, TriangleRule, DEGENERATE_AREA,
};
use crate::space::EnrichedSpace;

/// Mesh, cut decomposition and space of one level.
#[derive(Debug, Clone, Copy)]
pub struct LevelView<'a> {
    pub mesh: &'a StructuredMesh,
    pub decomp: &'a CutDecomposition,
    pub space: &'a EnrichedSpace,
}

/// Dual coefficients `C` (with `psi_j = sum_k C[j][k] phi_k`) and the lumped
/// masses `d_j = (phi_j, 1)` of one element part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDual {
    pub c: [[f64; 3]; 3],
    pub d: [f64; 3],
}

/// `C = [[3,-1,-1],[-1,3,-1],[-1,-1,3]]`, valid for every uncut triangle.
pub const REFERENCE_DUAL: [[f64; 3]; 3] = [[3.0, -1.0, -1.0], [-1.0, 3.0, -1.0], [-1.0, -1.0, 3.0]];

/// Edge-midpoint rule over the sub-triangles of a part, as `(point, weight,
/// barycentric coordinates in `vertices`)`. The coordinates of a midpoint are
/// averaged from those of the sub-triangle vertices rather than recomputed,
/// which keeps them accurate on slivers.
fn part_rule(vertices: &[Point; 3], part: &[[Point; 3]]) -> Vec<(Point, f64, [f64; 3])> {
    let mut out = Vec::with_capacity(3 * part.len());
    for t in part {
        let area = signed_area(t).abs();
        if area < DEGENERATE_AREA {
            continue;
        }
        let lv = t.map(|p| barycentric(vertices, p));
        for k in 0..3 {
            let (a, b) = (k, (k + 1) % 3);
            let p = [0.5 * (t[a][0] + t[b][0]), 0.5 * (t[a][1] + t[b][1])];
            let l = [0.5 * (lv[a][0] + lv[b][0]), 0.5 * (lv[a][1] + lv[b][1]), 0.5 * (lv[a][2] + lv[b][2])];
            out.push((p, area / 3.0, l));
        }
    }
    out
}

/// Local P1 mass matrix and lumped masses over the sub-triangles of a part.
pub fn part_moments(vertices: &[Point; 3], part: &[[Point; 3]]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut m = [[0.0; 3]; 3];
    let mut d = [0.0; 3];
    for (_, w, l) in part_rule(vertices, part) {
        for a in 0..3 {
            d[a] += w * l[a];
            for b in 0..3 {
                m[a][b] += w * l[a] * l[b];
            }
        }
    }
    (m, d)
}

/// `C = D M^{-1}` for one part; `None` if the part mass matrix is singular.
pub fn local_dual(vertices: &[Point; 3], part: &[[Point; 3]]) -> Option<LocalDual> {
    let (m, d) = part_moments(vertices, part);
    // symmetric Jacobi scaling before the factorization
    let s: Vec<f64> = (0..3).map(|a| 1.0 / m[a][a].sqrt()).collect();
    if s.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let scaled = DenseMatrix::from_fn(3, 3, |a, b| s[a] * m[a][b] * s[b]);
    let chol = DenseCholesky::new(&scaled).ok()?;
    let mut c = [[0.0; 3]; 3];
    for j in 0..3 {
        // row j of C solves M c_j = d_j e_j
        let mut rhs = [0.0; 3];
        rhs[j] = d[j] * s[j];
        let y = chol.solve(&rhs);
        for k in 0..3 {
            c[j][k] = s[k] * y[k];
        }
    }
    Some(LocalDual { c, d })
}

/// Dual coefficients of every cut-element part of one level.
#[derive(Debug, Clone)]
pub struct BiorthogonalBasis {
    /// aligned with `decomp.cuts()`, one entry per side
    cut: Vec<[Option<LocalDual>; 2]>,
    flagged: usize,
}

impl BiorthogonalBasis {
    /// Coefficients for `(e, sub)`; `None` for a flagged part.
    pub fn coefficients(&self, mesh: &StructuredMesh, decomp: &CutDecomposition, e: usize, sub: usize) -> Option<LocalDual> {
        match decomp.class(e) {
            crate::mesh::ElementClass::Inside(_) => {
                let a = mesh.area(e) / 3.0;
                Some(LocalDual {
                    c: REFERENCE_DUAL,
                    d: [a; 3],
                })
            }
            crate::mesh::ElementClass::Cut(k) => {
                let side = decomp.cuts()[k].side_of(sub)?;
                self.cut[k][side]
            }
        }
    }

    /// Number of cut parts whose mass matrix could not be inverted.
    pub fn num_flagged(&self) -> usize {
        self.flagged
    }
}

pub fn build_biorthogonal(mesh: &StructuredMesh, decomp: &CutDecomposition) -> BiorthogonalBasis {
    let mut flagged = 0;
    let cut = decomp
        .cuts()
        .iter()
        .map(|c| {
            let x = mesh.coords(c.element);
            [0, 1].map(|side| {
                let dual = local_dual(&x, &c.parts[side]);
                if dual.is_none() {
                    flagged += 1;
                }
                dual
            })
        })
        .collect();
    BiorthogonalBasis { cut, flagged }
}

/// Relative biorthogonality defect `max |(psi_j, phi_k) - delta_jk d_j| / max d` of one part.
pub fn biorthogonality_defect(vertices: &[Point; 3], part: &[[Point; 3]], dual: &LocalDual) -> f64 {
    let (m, d) = part_moments(vertices, part);
    let scale = d.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut worst = 0.0f64;
    for j in 0..3 {
        for k in 0..3 {
            let got: f64 = (0..3).map(|l| dual.c[j][l] * m[l][k]).sum();
            let want = if j == k { d[j] } else { 0.0 };
            worst = worst.max((got - want).abs());
        }
    }
    worst / scale
}

/// Sparse prolongation with its transpose (the restriction).
#[derive(Debug, Clone)]
pub struct TransferOperator {
    pub matrix: CsrMatrix,
    pub transpose: CsrMatrix,
    /// Fine dofs whose row was zeroed because their dual mass vanished.
    pub flagged: Vec<usize>,
}

impl TransferOperator {
    pub fn new(matrix: CsrMatrix, flagged: Vec<usize>) -> Self {
        let transpose = matrix.transpose();
        Self {
            matrix,
            transpose,
            flagged,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(CsrMatrix::identity(n), Vec::new())
    }

    pub fn fine_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn coarse_dim(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Prolongation `x_fine = T x_coarse`.
pub fn transfer_apply(t: &TransferOperator, x: &[f64]) -> Result<Vec<f64>> {
    t.matrix.spmv(x)
}

/// Restriction `r_coarse = T^T r_fine`.
pub fn transfer_apply_transposed(t: &TransferOperator, r: &[f64]) -> Result<Vec<f64>> {
    t.transpose.spmv(r)
}

/// Visits every fine part `(e, sub)` whose parent carries `sub`, with the parent,
/// the fine and coarse dofs, and the part's sub-triangles.
fn for_each_shared_part(
    coarse: LevelView,
    fine: LevelView,
    mut f: impl FnMut(usize, [Point; 3], [Point; 3], [usize; 3], [usize; 3], &[[Point; 3]]) -> Result<()>,
) -> Result<()> {
    if fine.mesh.cells_per_side() != 2 * coarse.mesh.cells_per_side() {
        return Err(Error::dims("fine mesh is not the uniform refinement of the coarse mesh"));
    }
    for e in 0..fine.mesh.num_elements() {
        let parent = fine.mesh.parent_of(e);
        let xf = fine.mesh.coords(e);
        let xc = coarse.mesh.coords(parent);
        for sub in fine.decomp.subdomains_of(e) {
            if !coarse.decomp.contains(parent, sub) {
                continue;
            }
            let fd = fine.space.element_dofs(fine.mesh, e, sub).expect("fine copy present");
            let cd = coarse.space.element_dofs(coarse.mesh, parent, sub).expect("coarse copy present");
            let part = fine.decomp.part(fine.mesh, e, sub);
            f(e, xf, xc, fd, cd, &part)?;
        }
    }
    Ok(())
}

/// Pseudo-L2 prolongation `T = D^{-1} B` built with the dual basis.
pub fn assemble_transfer(coarse: LevelView, fine: LevelView, basis: &BiorthogonalBasis) -> Result<TransferOperator> {
    let nf = fine.space.num_dofs();
    let nc = coarse.space.num_dofs();
    let mut diag = vec![0.0; nf];
    let mut triplets = Vec::with_capacity(9 * fine.mesh.num_elements());
    for_each_shared_part(coarse, fine, |e, xf, xc, fd, cd, part| {
        let sub = fine.space.dof_info(fd[0]).1;
        let Some(dual) = basis.coefficients(fine.mesh, fine.decomp, e, sub) else {
            return Ok(());
        };
        let mut b = [[0.0; 3]; 3];
        for (p, w, lf) in part_rule(&xf, part) {
            let lc = barycentric(&xc, p);
            for j in 0..3 {
                let psi = dual.c[j][0] * lf[0] + dual.c[j][1] * lf[1] + dual.c[j][2] * lf[2];
                for q in 0..3 {
                    b[j][q] += w * psi * lc[q];
                }
            }
        }
        for j in 0..3 {
            // equals d_j = (psi_j, 1) in exact arithmetic; summing B keeps T 1 = 1
            // on slivers where C carries cond(M) * eps of rounding
            diag[fd[j]] += b[j].iter().sum::<f64>();
            for q in 0..3 {
                triplets.push((fd[j], cd[q], b[j][q]));
            }
        }
        Ok(())
    })?;
    let area = fine.mesh.area(0);
    let mut flagged = Vec::new();
    let inv: Vec<f64> = diag
        .iter()
        .enumerate()
        .map(|(p, &d)| {
            if d.abs() < 1e-14 * area {
                flagged.push(p);
                0.0
            } else {
                1.0 / d
            }
        })
        .collect();
    for t in triplets.iter_mut() {
        t.2 *= inv[t.0];
    }
    // T is an interpolation: tiny entries are rounding noise of exact zeros
    let t = CsrMatrix::from_triplets(nf, nc, &triplets)?.prune(1e-13);
    if !flagged.is_empty() {
        debug!(target: "nxfem::transfer", "{} fine dofs without dual mass", flagged.len());
    }
    Ok(TransferOperator::new(t, flagged))
}

/// Reference L2 projection with the Lagrange multiplier: `D` is the fine mass
/// matrix and `T = D^{-1} B` is applied through a factorization.
#[derive(Debug, Clone)]
pub struct LagrangeTransfer {
    pub b: CsrMatrix,
    pub d: CsrMatrix,
    factor: SparseCholesky,
}

impl LagrangeTransfer {
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.factor.solve(&self.b.spmv(x)?)
    }
}

pub fn assemble_lagrange_transfer(coarse: LevelView, fine: LevelView) -> Result<LagrangeTransfer> {
    let nf = fine.space.num_dofs();
    let nc = coarse.space.num_dofs();
    let mut bt = Vec::new();
    let mut dt = Vec::new();
    for_each_shared_part(coarse, fine, |_, xf, xc, fd, cd, part| {
        for (p, w) in quadrature_for_part(part, TriangleRule::Degree2).iter() {
            let lf = barycentric(&xf, p);
            let lc = barycentric(&xc, p);
            for j in 0..3 {
                for q in 0..3 {
                    bt.push((fd[j], cd[q], w * lf[j] * lc[q]));
                    dt.push((fd[j], fd[q], w * lf[j] * lf[q]));
                }
            }
        }
        Ok(())
    })?;
    let b = CsrMatrix::from_triplets(nf, nc, &bt)?;
    let d = CsrMatrix::from_triplets(nf, nf, &dt)?;
    let factor = SparseCholesky::new(&d)?;
    Ok(LagrangeTransfer { b, d, factor })
}
