//! Stiffness and load assembly for the three Nitsche interface couplings.
//!
//! On a cut element the six local dofs are ordered `[first copy x3, second copy x3]`,
//! following the vertex order of the background triangle. The jump is
//! `[[v]] = v_first - v_second` and the normal points from first to second.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use log::info;

use crate::error::{Error, Result};
use crate::linalg::{dense_generalized_eig_max, kernel_complement, CsrMatrix, DenseCholesky, DenseMatrix};
use crate::mesh::{
    barycentric, p1_gradients, quadrature_for_part, quadrature_for_segment, CutDecomposition, CutElement,
    Point, StructuredMesh, TriangleRule,
};
use crate::space::{apply_dirichlet, EnrichedSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Penalty from a local generalized eigenproblem.
    Eigen,
    /// Lifting-operator stabilization.
    Lifting,
    /// Coefficient-weighted penalty plus ghost penalty.
    Ghost,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Eigen, Variant::Lifting, Variant::Ghost];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Eigen => "N-EV",
            Variant::Lifting => "N-LO",
            Variant::Ghost => "N-GP",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_start_matches("n-") {
            "ev" => Ok(Variant::Eigen),
            "lo" => Ok(Variant::Lifting),
            "gp" => Ok(Variant::Ghost),
            _ => Err(Error::Config(format!("unknown variant '{s}' (expected ev, lo or gp)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NitscheConfig {
    pub variant: Variant,
    pub gamma0: f64,
    pub ghost_eps: f64,
    pub eig_safety: f64,
}

impl NitscheConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            gamma0: 10.0,
            ghost_eps: 0.1,
            eig_safety: 4.0,
        }
    }
}

pub type ScalarField = Arc<dyn Fn(Point, usize) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point, usize) -> [f64; 2] + Send + Sync>;

/// Coefficients and data of `-div(alpha grad u) = f`, all indexed by subdomain.
#[derive(Clone)]
pub struct ProblemCoefficients {
    pub alpha: Vec<f64>,
    pub source: ScalarField,
    pub exact: Option<ScalarField>,
    pub exact_gradient: Option<VectorField>,
    /// Rule for the load vector on each (sub-)triangle.
    pub load_rule: TriangleRule,
}

impl fmt::Debug for ProblemCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemCoefficients")
            .field("alpha", &self.alpha)
            .field("load_rule", &self.load_rule)
            .finish_non_exhaustive()
    }
}

impl ProblemCoefficients {
    pub fn new(alpha: Vec<f64>, source: impl Fn(Point, usize) -> f64 + Send + Sync + 'static) -> Self {
        assert!(alpha.iter().all(|&a| a > 0.0), "coefficients must be positive");
        Self {
            alpha,
            source: Arc::new(source),
            exact: None,
            exact_gradient: None,
            load_rule: TriangleRule::Degree2,
        }
    }

    pub fn with_exact(
        mut self,
        u: impl Fn(Point, usize) -> f64 + Send + Sync + 'static,
        grad: impl Fn(Point, usize) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(Arc::new(u));
        self.exact_gradient = Some(Arc::new(grad));
        self
    }

    pub fn with_load_rule(mut self, rule: TriangleRule) -> Self {
        self.load_rule = rule;
        self
    }
}

/// Average weights and penalty of one cut element. `gamma` multiplies
/// `int_Gamma [[u]][[v]]` directly (any `1/h` is already folded in).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceWeights {
    pub beta: [f64; 2],
    pub gamma: f64,
}

pub fn harmonic_weights(measures: [f64; 2], alpha: [f64; 2]) -> [f64; 2] {
    let w = [measures[0] / alpha[0], measures[1] / alpha[1]];
    let s = w[0] + w[1];
    [w[0] / s, w[1] / s]
}

pub fn coefficient_weights(alpha: [f64; 2]) -> [f64; 2] {
    let s = alpha[0] + alpha[1];
    [alpha[1] / s, alpha[0] / s]
}

/// Element-level data of a cut element.
#[derive(Debug, Clone)]
pub struct LocalCut<'a> {
    pub cut: &'a CutElement,
    pub dofs: [usize; 6],
    pub vertices: [Point; 3],
    pub grads: [[f64; 2]; 3],
    pub alpha: [f64; 2],
    pub h: f64,
}

impl<'a> LocalCut<'a> {
    pub fn new(
        mesh: &StructuredMesh,
        space: &EnrichedSpace,
        cut: &'a CutElement,
        coeffs: &ProblemCoefficients,
    ) -> Self {
        let e = cut.element;
        let [s1, s2] = cut.subdomains;
        let d1 = space.element_dofs(mesh, e, s1).expect("cut element nodes carry both copies");
        let d2 = space.element_dofs(mesh, e, s2).expect("cut element nodes carry both copies");
        let vertices = mesh.coords(e);
        Self {
            cut,
            dofs: [d1[0], d1[1], d1[2], d2[0], d2[1], d2[2]],
            vertices,
            grads: p1_gradients(&vertices),
            alpha: [coeffs.alpha[s1], coeffs.alpha[s2]],
            h: mesh.diameter(e),
        }
    }

    /// Constants on either copy.
    pub fn kernel() -> Vec<Vec<f64>> {
        vec![vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]]
    }

    /// `sum_i int_{K_i} alpha grad u . grad v`.
    pub fn stiffness(&self) -> DenseMatrix {
        let mut s = DenseMatrix::zeros(6, 6);
        for i in 0..2 {
            let w = self.alpha[i] * self.cut.measures[i];
            for a in 0..3 {
                for b in 0..3 {
                    let g = self.grads[a][0] * self.grads[b][0] + self.grads[a][1] * self.grads[b][1];
                    s[(3 * i + a, 3 * i + b)] = w * g;
                }
            }
        }
        s
    }

    /// Coefficients of the (constant) flux average `{alpha grad_n v}`.
    pub fn flux_vector(&self, beta: [f64; 2]) -> Vec<f64> {
        let n = self.cut.normal;
        let mut g = vec![0.0; 6];
        for i in 0..2 {
            for a in 0..3 {
                g[3 * i + a] = beta[i] * self.alpha[i] * (self.grads[a][0] * n[0] + self.grads[a][1] * n[1]);
            }
        }
        g
    }

    /// `J = int_Gamma [[phi]]` and `Q = int_Gamma [[phi]] [[phi]]^T`.
    pub fn jump_moments(&self) -> (Vec<f64>, DenseMatrix) {
        let q = quadrature_for_segment(self.cut.segment[0], self.cut.segment[1]);
        let mut jm = vec![0.0; 6];
        let mut qm = DenseMatrix::zeros(6, 6);
        for (p, w) in q.iter() {
            let l = barycentric(&self.vertices, p);
            let j = [l[0], l[1], l[2], -l[0], -l[1], -l[2]];
            for a in 0..6 {
                jm[a] += w * j[a];
                for b in 0..6 {
                    qm[(a, b)] += w * j[a] * j[b];
                }
            }
        }
        (jm, qm)
    }

    /// Consistency, symmetry and penalty terms.
    pub fn interface_matrix(&self, weights: InterfaceWeights) -> DenseMatrix {
        let g = self.flux_vector(weights.beta);
        let (j, q) = self.jump_moments();
        let mut m = q.scaled(weights.gamma);
        m.add_scaled(-1.0, &DenseMatrix::outer(&j, &g));
        m.add_scaled(-1.0, &DenseMatrix::outer(&g, &j));
        m
    }

    /// Largest `lambda` of `b_e x = lambda c_e x` with the constants of both copies deflated.
    pub fn eigen_penalty(&self, beta: [f64; 2]) -> Result<f64> {
        let g = self.flux_vector(beta);
        let b = DenseMatrix::outer(&g, &g).scaled(self.cut.length());
        dense_generalized_eig_max(&b, &self.stiffness(), &Self::kernel()).map_err(|e| self.degenerate(e))
    }

    /// Right-hand side of the local lifting problem, `C[v][u] = -int_Gamma [[u]] {alpha grad_n v}`.
    pub fn lifting_rhs(&self, beta: [f64; 2]) -> DenseMatrix {
        let g = self.flux_vector(beta);
        let (j, _) = self.jump_moments();
        DenseMatrix::outer(&g, &j).scaled(-1.0)
    }

    /// Column `u` holds the lifted function of the `u`-th local basis function,
    /// taken orthogonal to both per-copy constants.
    pub fn lifting(&self, beta: [f64; 2]) -> Result<DenseMatrix> {
        let q = kernel_complement(6, &Self::kernel())?;
        let sp = self.stiffness().congruence(&q)?;
        let chol = DenseCholesky::new(&sp).map_err(|e| self.degenerate(e))?;
        let rhs = q.transpose().matmul(&self.lifting_rhs(beta))?;
        q.matmul(&chol.solve_matrix(&rhs))
    }

    /// `2 W^T S W` for the lifting `W`.
    pub fn lifting_matrix(&self, beta: [f64; 2]) -> Result<DenseMatrix> {
        let w = self.lifting(beta)?;
        Ok(self.stiffness().congruence(&w)?.scaled(2.0))
    }

    fn degenerate(&self, e: Error) -> Error {
        Error::DegenerateElement {
            element: self.cut.element,
            reason: e.to_string(),
        }
    }
}

/// Per-cut-element weights and penalties for `config.variant`.
pub fn compute_weights(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    coeffs: &ProblemCoefficients,
    config: &NitscheConfig,
) -> Result<Vec<InterfaceWeights>> {
    decomp
        .cuts()
        .iter()
        .map(|cut| {
            let local = LocalCut::new(mesh, space, cut, coeffs);
            let alpha = local.alpha;
            Ok(match config.variant {
                Variant::Eigen => {
                    let beta = harmonic_weights(cut.measures, alpha);
                    InterfaceWeights {
                        beta,
                        gamma: config.eig_safety * local.eigen_penalty(beta)?,
                    }
                }
                Variant::Lifting => InterfaceWeights {
                    beta: harmonic_weights(cut.measures, alpha),
                    gamma: cut.length() / (cut.measures[0] / alpha[0] + cut.measures[1] / alpha[1]),
                },
                Variant::Ghost => InterfaceWeights {
                    beta: coefficient_weights(alpha),
                    gamma: config.gamma0 * 2.0 * alpha[0] * alpha[1] / (alpha[0] + alpha[1]) / local.h,
                },
            })
        })
        .collect()
}

fn scatter(triplets: &mut Vec<(usize, usize, f64)>, dofs: &[usize], m: &DenseMatrix) {
    for (a, &da) in dofs.iter().enumerate() {
        for (b, &db) in dofs.iter().enumerate() {
            let v = m[(a, b)];
            if v != 0.0 {
                triplets.push((da, db, v));
            }
        }
    }
}

/// Bulk stiffness `sum_i int_{Omega_i} alpha grad u . grad v` and load `int f v`.
pub fn assemble_volume(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    coeffs: &ProblemCoefficients,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let n = space.num_dofs();
    let mut triplets = Vec::with_capacity(9 * mesh.num_elements() + 18 * decomp.cuts().len());
    let mut load = vec![0.0; n];
    for e in 0..mesh.num_elements() {
        let x = mesh.coords(e);
        let grads = p1_gradients(&x);
        for sub in decomp.subdomains_of(e) {
            let dofs = space.element_dofs(mesh, e, sub).expect("element nodes carry its copies");
            let meas = decomp.part_measure(mesh, e, sub);
            let w = coeffs.alpha[sub] * meas;
            for a in 0..3 {
                for b in 0..3 {
                    let g = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                    triplets.push((dofs[a], dofs[b], w * g));
                }
            }
            for (p, wq) in quadrature_for_part(&decomp.part(mesh, e, sub), coeffs.load_rule).iter() {
                let fv = (coeffs.source)(p, sub);
                let l = barycentric(&x, p);
                for a in 0..3 {
                    load[dofs[a]] += wq * fv * l[a];
                }
            }
        }
    }
    Ok((CsrMatrix::from_triplets(n, n, &triplets)?, load))
}

/// Nitsche consistency, symmetry and penalty terms on every interface segment.
pub fn assemble_interface_terms(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    coeffs: &ProblemCoefficients,
    weights: &[InterfaceWeights],
) -> Result<CsrMatrix> {
    let n = space.num_dofs();
    let mut triplets = Vec::with_capacity(36 * decomp.cuts().len());
    for (cut, w) in decomp.cuts().iter().zip(weights) {
        let local = LocalCut::new(mesh, space, cut, coeffs);
        scatter(&mut triplets, &local.dofs, &local.interface_matrix(*w));
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// `2 sum_K sum_i int_{K_i} alpha L_K(u) . L_K(v)`.
pub fn assemble_lifting_terms(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    coeffs: &ProblemCoefficients,
    weights: &[InterfaceWeights],
) -> Result<CsrMatrix> {
    let n = space.num_dofs();
    let mut triplets = Vec::with_capacity(36 * decomp.cuts().len());
    for (cut, w) in decomp.cuts().iter().zip(weights) {
        let local = LocalCut::new(mesh, space, cut, coeffs);
        scatter(&mut triplets, &local.dofs, &local.lifting_matrix(w.beta)?);
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Normal-gradient jump of the copy-`sub` basis across a ghost face, as
/// `(dofs, jumps)` over the four nodes of the face patch.
pub fn ghost_face_jumps(
    mesh: &StructuredMesh,
    space: &EnrichedSpace,
    face: &crate::mesh::GhostFace,
) -> (Vec<usize>, Vec<f64>, f64) {
    let [e1, e2] = face.elements;
    let pa = mesh.vertex(face.vertices[0]);
    let pb = mesh.vertex(face.vertices[1]);
    let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
    let n = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
    let mut dofs: Vec<usize> = Vec::with_capacity(4);
    let mut jumps: Vec<f64> = Vec::with_capacity(4);
    for (e, sign) in [(e1, 1.0), (e2, -1.0)] {
        let x = mesh.coords(e);
        let g = p1_gradients(&x);
        let d = space.element_dofs(mesh, e, face.subdomain).expect("ghost face elements carry the copy");
        for a in 0..3 {
            let v = sign * (g[a][0] * n[0] + g[a][1] * n[1]);
            match dofs.iter().position(|&x| x == d[a]) {
                Some(k) => jumps[k] += v,
                None => {
                    dofs.push(d[a]);
                    jumps.push(v);
                }
            }
        }
    }
    (dofs, jumps, len)
}

/// `sum_i sum_G int_G eps h_G alpha [[grad_n u]] [[grad_n v]]`.
pub fn assemble_ghost_penalty(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    coeffs: &ProblemCoefficients,
    eps: f64,
) -> Result<CsrMatrix> {
    let n = space.num_dofs();
    let mut triplets = Vec::with_capacity(16 * decomp.ghost_faces().len());
    for face in decomp.ghost_faces() {
        let (dofs, jumps, len) = ghost_face_jumps(mesh, space, face);
        // h_G = |G|, and the jumps are constant along the face
        let w = eps * len * len * coeffs.alpha[face.subdomain];
        for (a, &da) in dofs.iter().enumerate() {
            for (b, &db) in dofs.iter().enumerate() {
                triplets.push((da, db, w * jumps[a] * jumps[b]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyStats {
    pub cut_elements: usize,
    pub min_cut_fraction: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

/// Assembled (pre-Dirichlet) system of one variant.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub weights: Vec<InterfaceWeights>,
    pub stats: AssemblyStats,
}

pub fn assemble(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    coeffs: &ProblemCoefficients,
    config: &NitscheConfig,
) -> Result<Assembled> {
    if coeffs.alpha.len() < decomp.num_subdomains() {
        return Err(Error::Config(format!(
            "{} coefficients given for {} subdomains",
            coeffs.alpha.len(),
            decomp.num_subdomains()
        )));
    }
    let weights = compute_weights(mesh, decomp, space, coeffs, config)?;
    let (vol, rhs) = assemble_volume(mesh, decomp, space, coeffs)?;
    let mut matrix = vol.add(&assemble_interface_terms(mesh, decomp, space, coeffs, &weights)?)?;
    match config.variant {
        Variant::Eigen => {}
        Variant::Lifting => matrix = matrix.add(&assemble_lifting_terms(mesh, decomp, space, coeffs, &weights)?)?,
        Variant::Ghost => {
            matrix = matrix.add(&assemble_ghost_penalty(mesh, decomp, space, coeffs, config.ghost_eps)?)?
        }
    }
    let stats = AssemblyStats {
        cut_elements: decomp.cuts().len(),
        min_cut_fraction: decomp
            .cuts()
            .iter()
            .map(|c| c.measures[0].min(c.measures[1]) / mesh.area(c.element))
            .fold(f64::INFINITY, f64::min),
        gamma_min: weights.iter().map(|w| w.gamma).fold(f64::INFINITY, f64::min),
        gamma_max: weights.iter().map(|w| w.gamma).fold(0.0, f64::max),
    };
    info!(
        target: "nxfem::assembly",
        "variant={} dofs={} cuts={} min_cut_fraction={:.3e} gamma=[{:.3e}, {:.3e}]",
        config.variant,
        space.num_dofs(),
        stats.cut_elements,
        stats.min_cut_fraction,
        stats.gamma_min,
        stats.gamma_max
    );
    Ok(Assembled {
        matrix,
        rhs,
        weights,
        stats,
    })
}

/// Assembles and imposes the exact solution as Dirichlet data.
pub fn assemble_system(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    coeffs: &ProblemCoefficients,
    config: &NitscheConfig,
) -> Result<Assembled> {
    let mut sys = assemble(mesh, decomp, space, coeffs, config)?;
    let exact = coeffs
        .exact
        .clone()
        .ok_or_else(|| Error::Config("Dirichlet data needs an exact solution".into()))?;
    let (a, f) = apply_dirichlet(space, mesh, &sys.matrix, &sys.rhs, |p, s| exact(p, s))?;
    sys.matrix = a;
    sys.rhs = f;
    Ok(sys)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub energy: f64,
}

/// L2 error and the mesh-dependent energy error
/// `|grad e|^2 + sum_K h^-1 |[[e]]|^2_Gamma_K + sum_K h |{grad_n e}|^2_Gamma_K`,
/// with the average weighted by `weights[k].beta`.
pub fn compute_errors(
    mesh: &StructuredMesh,
    decomp: &CutDecomposition,
    space: &EnrichedSpace,
    coeffs: &ProblemCoefficients,
    weights: &[InterfaceWeights],
    u_h: &[f64],
) -> Result<ErrorNorms> {
    let (Some(u), Some(du)) = (coeffs.exact.as_ref(), coeffs.exact_gradient.as_ref()) else {
        return Err(Error::Config("error norms need the exact solution and its gradient".into()));
    };
    if u_h.len() != space.num_dofs() {
        return Err(Error::dims("solution does not match the space"));
    }
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for e in 0..mesh.num_elements() {
        let x = mesh.coords(e);
        let grads = p1_gradients(&x);
        for sub in decomp.subdomains_of(e) {
            let dofs = space.element_dofs(mesh, e, sub).expect("element nodes carry its copies");
            let c = dofs.map(|d| u_h[d]);
            let gh = [
                c[0] * grads[0][0] + c[1] * grads[1][0] + c[2] * grads[2][0],
                c[0] * grads[0][1] + c[1] * grads[1][1] + c[2] * grads[2][1],
            ];
            for (p, w) in quadrature_for_part(&decomp.part(mesh, e, sub), TriangleRule::Degree5).iter() {
                let l = barycentric(&x, p);
                let uh = c[0] * l[0] + c[1] * l[1] + c[2] * l[2];
                l2 += w * (u(p, sub) - uh).powi(2);
                let g = du(p, sub);
                h1 += w * ((g[0] - gh[0]).powi(2) + (g[1] - gh[1]).powi(2));
            }
        }
    }
    let mut jump = 0.0;
    let mut flux = 0.0;
    for (cut, w) in decomp.cuts().iter().zip(weights) {
        let local = LocalCut::new(mesh, space, cut, coeffs);
        let c = local.dofs.map(|d| u_h[d]);
        let n = cut.normal;
        let mut dn_h = [0.0; 2];
        for i in 0..2 {
            for a in 0..3 {
                dn_h[i] += c[3 * i + a] * (local.grads[a][0] * n[0] + local.grads[a][1] * n[1]);
            }
        }
        let [s1, s2] = cut.subdomains;
        for (p, wq) in quadrature_for_segment(cut.segment[0], cut.segment[1]).iter() {
            let l = barycentric(&local.vertices, p);
            let uh1 = c[0] * l[0] + c[1] * l[1] + c[2] * l[2];
            let uh2 = c[3] * l[0] + c[4] * l[1] + c[5] * l[2];
            let e_jump = (u(p, s1) - uh1) - (u(p, s2) - uh2);
            jump += wq * e_jump * e_jump / local.h;
            let g1 = du(p, s1);
            let g2 = du(p, s2);
            let e1 = g1[0] * n[0] + g1[1] * n[1] - dn_h[0];
            let e2 = g2[0] * n[0] + g2[1] * n[1] - dn_h[1];
            let avg = w.beta[0] * e1 + w.beta[1] * e2;
            flux += wq * avg * avg * local.h;
        }
    }
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        energy: (h1 + jump + flux).sqrt(),
    })
}
