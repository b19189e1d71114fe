//! Doubled P1 space: one copy of the nodal basis per subdomain, truncated to it.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{barycentric, p1_gradients, CutDecomposition, Point, StructuredMesh};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct EnrichedSpace {
    num_subdomains: usize,
    num_nodes: usize,
    /// `dof_map[sub * num_nodes + node]`
    dof_map: Vec<usize>,
    dofs: Vec<(usize, usize)>,
    boundary: Vec<bool>,
}

/// Truncated P1 basis of one element copy at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEvaluation {
    pub element: usize,
    pub subdomain: usize,
    pub dofs: [usize; 3],
    pub values: [f64; 3],
    pub gradients: [[f64; 2]; 3],
}

/// Numbers the dofs subdomain-major, node-minor. A node belongs to subdomain `i`
/// if one of its elements has a part of positive measure in `i`.
pub fn build_space(mesh: &StructuredMesh, decomp: &CutDecomposition) -> EnrichedSpace {
    let ns = decomp.num_subdomains();
    let nn = mesh.num_vertices();
    let mut active = vec![false; ns * nn];
    for e in 0..mesh.num_elements() {
        for s in decomp.subdomains_of(e) {
            for v in mesh.triangle(e) {
                active[s * nn + v] = true;
            }
        }
    }
    let mut dof_map = vec![NONE; ns * nn];
    let mut dofs = Vec::new();
    let mut boundary = Vec::new();
    for s in 0..ns {
        for v in 0..nn {
            if active[s * nn + v] {
                dof_map[s * nn + v] = dofs.len();
                dofs.push((v, s));
                boundary.push(mesh.is_boundary_vertex(v));
            }
        }
    }
    EnrichedSpace {
        num_subdomains: ns,
        num_nodes: nn,
        dof_map,
        dofs,
        boundary,
    }
}

impl EnrichedSpace {
    pub fn num_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn num_subdomains(&self) -> usize {
        self.num_subdomains
    }

    pub fn dof(&self, node: usize, sub: usize) -> Option<usize> {
        let d = self.dof_map[sub * self.num_nodes + node];
        (d != NONE).then_some(d)
    }

    /// `(node, subdomain)` of a dof.
    pub fn dof_info(&self, dof: usize) -> (usize, usize) {
        self.dofs[dof]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn boundary_dofs(&self) -> Vec<usize> {
        (0..self.num_dofs()).filter(|&d| self.boundary[d]).collect()
    }

    /// Number of dofs owned by each subdomain.
    pub fn subdomain_sizes(&self) -> Vec<usize> {
        let mut n = vec![0; self.num_subdomains];
        for &(_, s) in &self.dofs {
            n[s] += 1;
        }
        n
    }

    /// Dofs of the three vertices of `e` in copy `sub`; `None` if any is missing.
    pub fn element_dofs(&self, mesh: &StructuredMesh, e: usize, sub: usize) -> Option<[usize; 3]> {
        let t = mesh.triangle(e);
        Some([self.dof(t[0], sub)?, self.dof(t[1], sub)?, self.dof(t[2], sub)?])
    }

    /// Nodal interpolant of `u(point, subdomain)`.
    pub fn interpolate(&self, mesh: &StructuredMesh, u: impl Fn(Point, usize) -> f64) -> Vec<f64> {
        self.dofs.iter().map(|&(v, s)| u(mesh.vertex(v), s)).collect()
    }
}

/// Values and gradients of the copy-`sub` basis functions of `e` at `p`; zero if
/// `p` lies outside the part of `e` in `sub`.
pub fn evaluate_basis(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    e: usize,
    sub: usize,
    p: Point,
) -> Result<BasisEvaluation> {
    let dofs = space
        .element_dofs(mesh, e, sub)
        .filter(|_| decomp.contains(e, sub))
        .ok_or(Error::SubdomainNotPresent { element: e, subdomain: sub })?;
    let x = mesh.coords(e);
    let inside = decomp
        .part(mesh, e, sub)
        .iter()
        .any(|t| barycentric(t, p).iter().all(|&l| l >= -1e-12));
    let (values, gradients) = if inside {
        (barycentric(&x, p), p1_gradients(&x))
    } else {
        ([0.0; 3], [[0.0; 2]; 3])
    };
    Ok(BasisEvaluation {
        element: e,
        subdomain: sub,
        dofs,
        values,
        gradients,
    })
}

/// Strong Dirichlet conditions by symmetric elimination: boundary rows and
/// columns are replaced by the identity and the load is corrected with the lift.
pub fn apply_dirichlet(
    space: &EnrichedSpace,
    mesh: &StructuredMesh,
    a: &CsrMatrix,
    f: &[f64],
    g: impl Fn(Point, usize) -> f64,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let n = space.num_dofs();
    if a.nrows() != n || a.ncols() != n || f.len() != n {
        return Err(Error::dims("system does not match the space"));
    }
    let mut lift = vec![0.0; n];
    for d in 0..n {
        if space.is_boundary(d) {
            let (v, s) = space.dof_info(d);
            lift[d] = g(mesh.vertex(v), s);
        }
    }
    let al = a.spmv(&lift)?;
    let rhs: Vec<f64> = (0..n)
        .map(|d| if space.is_boundary(d) { lift[d] } else { f[d] - al[d] })
        .collect();

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(a.nnz());
    let mut vals = Vec::with_capacity(a.nnz());
    row_ptr.push(0);
    for i in 0..n {
        let (ci, vi) = a.row(i);
        if space.is_boundary(i) {
            cols.push(i);
            vals.push(1.0);
        } else {
            for (&c, &v) in ci.iter().zip(vi) {
                if !space.is_boundary(c) {
                    cols.push(c);
                    vals.push(v);
                }
            }
        }
        row_ptr.push(cols.len());
    }
    Ok((CsrMatrix::from_raw(n, n, row_ptr, cols, vals)?, rhs))
}
