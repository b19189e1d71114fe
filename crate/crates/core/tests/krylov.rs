mod common;

use common::{
    csr_from_dense, dense_congruence, dense_matmul, dense_matvec, dense_solve, dense_transpose, largest_pencil_root,
    random_spd_dense, random_vec, relative_diff, rng,
};
use nxfem::bench::{example2, example3, Discretization};
use nxfem::krylov::{
    cg, cg_observed, energy_norm, estimate_rho_star, IdentityPreconditioner, JacobiPreconditioner,
    MultigridPreconditioner, Preconditioner, SgsPreconditioner,
};
use nxfem::linalg::CsrMatrix;
use nxfem::multigrid::SmootherConfig;
use nxfem::nitsche::Variant;
use nxfem::linalg::{dense_generalized_eig_max, extremal_eigs, sparse_direct_solve, symmetric_eigen, triple_product, DenseMatrix};
use nxfem::Error;
use rand::Rng;

#[test]
fn identity_converges_in_one_iteration() {
    let a = csr_from_dense(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    let (u, rep) = cg(&a, &[1.0, 0.0, 0.0], &IdentityPreconditioner, 1e-12, 10).unwrap();
    assert_eq!(u, vec![1.0, 0.0, 0.0]);
    assert_eq!(rep.iterations, 1);
    assert_eq!(rep.rho_star, None);

    let d = csr_from_dense(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
    let (u, _) = cg(&d, &[2.0, 8.0], &IdentityPreconditioner, 1e-14, 10).unwrap();
    assert!((u[0] - 1.0).abs() < 1e-14 && (u[1] - 2.0).abs() < 1e-14);
}

#[test]
fn unpreconditioned_cg_terminates_within_the_dimension() {
    let mut r = rng(21);
    for _ in 0..5 {
        let ad = random_spd_dense(&mut r, 30);
        let a = csr_from_dense(&ad);
        let b = random_vec(&mut r, 30);
        let (u, rep) = cg(&a, &b, &IdentityPreconditioner, 1e-12, 32).unwrap();
        assert!(rep.iterations <= 32);
        for (x, y) in u.iter().zip(&dense_solve(&ad, &b)) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

fn assert_monotone_energy_error(a: &CsrMatrix, b: &[f64], pc: &dyn Preconditioner) {
    let exact = sparse_direct_solve(a, b).unwrap();
    let mut errs = vec![energy_norm(a, &exact)];
    cg_observed(a, b, pc, 1e-12, 1000, |_, u| {
        let e: Vec<f64> = u.iter().zip(&exact).map(|(p, q)| p - q).collect();
        errs.push(energy_norm(a, &e));
    })
    .unwrap();
    assert!(errs.len() > 2);
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-10) + 1e-14 * errs[0], "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn energy_error_decreases_monotonically() {
    let mut r = rng(22);
    for n in [30, 120] {
        let a = csr_from_dense(&random_spd_dense(&mut r, n));
        let b = random_vec(&mut r, n);
        assert_monotone_energy_error(&a, &b, &IdentityPreconditioner);
        assert_monotone_energy_error(&a, &b, &JacobiPreconditioner::new(&a).unwrap());
        assert_monotone_energy_error(&a, &b, &SgsPreconditioner::new(&a));
    }
    let disc = Discretization::new(&example3(1.0, 10.0).unwrap(), Variant::Eigen, 20, 2).unwrap();
    assert!(disc.num_dofs() <= 1000);
    let (a, b) = (&disc.system.matrix, &disc.system.rhs);
    let h = disc.hierarchy(SmootherConfig::default()).unwrap();
    assert_monotone_energy_error(a, b, &IdentityPreconditioner);
    assert_monotone_energy_error(a, b, &JacobiPreconditioner::new(a).unwrap());
    assert_monotone_energy_error(a, b, &SgsPreconditioner::new(a));
    assert_monotone_energy_error(a, b, &MultigridPreconditioner::new(&h));
}

#[test]
fn cg_reports_non_convergence() {
    let mut r = rng(23);
    let ad = random_spd_dense(&mut r, 40);
    let a = csr_from_dense(&ad);
    let b = random_vec(&mut r, 40);
    match cg(&a, &b, &IdentityPreconditioner, 1e-14, 3) {
        Err(Error::NotConverged { report }) => {
            assert_eq!(report.iterations, 3);
            assert!(!report.converged);
            assert_eq!(report.residuals.len(), 3);
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
    let (u, rep) = cg(&a, &vec![0.0; 40], &IdentityPreconditioner, 1e-12, 10).unwrap();
    assert!(rep.converged && u.iter().all(|&x| x == 0.0));
}

#[test]
fn rho_star_of_a_geometric_sequence() {
    let inc: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();
    assert_eq!(estimate_rho_star(&inc), Some(0.5));
    assert_eq!(estimate_rho_star(&[1.0]), None);
    assert_eq!(estimate_rho_star(&[]), None);
}

#[test]
fn sparse_products_match_dense() {
    let mut r = rng(24);
    let sparse = |r: &mut rand_chacha::ChaCha8Rng, m: usize, n: usize| -> Vec<Vec<f64>> {
        (0..m).map(|_| (0..n).map(|_| if r.gen_bool(0.4) { r.gen_range(-1.0..1.0) } else { 0.0 }).collect()).collect()
    };
    let ad = sparse(&mut r, 5, 5);
    let x = random_vec(&mut r, 5);
    let y = csr_from_dense(&ad).spmv(&x).unwrap();
    for (p, q) in y.iter().zip(&dense_matvec(&ad, &x)) {
        assert!((p - q).abs() <= 1e-14);
    }

    let a = random_spd_dense(&mut r, 8);
    let p = sparse(&mut r, 8, 5);
    let got = triple_product(&csr_from_dense(&a), &csr_from_dense(&p)).unwrap().to_dense();
    let want = dense_matmul(&dense_transpose(&p), &dense_matmul(&a, &p));
    for (gr, wr) in got.iter().zip(&want) {
        for (g, w) in gr.iter().zip(wr) {
            assert!((g - w).abs() <= 1e-13);
        }
    }
}

#[test]
fn generalized_eigenvalue_matches_determinant_roots() {
    let mut r = rng(25);
    // centring projector: both matrices get the constant vector as kernel
    let pi: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 0.75 } else { -0.25 }).collect()).collect();
    // differences e_i - e_4 span the complement of the constants
    let q: Vec<Vec<f64>> = (0..4).map(|i| (0..3).map(|j| if i == j { 1.0 } else if i == 3 { -1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..10 {
        let y: Vec<Vec<f64>> = (0..2).map(|_| random_vec(&mut r, 4)).collect();
        let b = dense_congruence(&dense_matmul(&dense_transpose(&y), &y), &pi);
        let c = dense_congruence(&random_spd_dense(&mut r, 4), &pi);
        let got = dense_generalized_eig_max(&DenseMatrix::from_rows(&b), &DenseMatrix::from_rows(&c), &[vec![1.0; 4]]).unwrap();
        let want = largest_pencil_root(&dense_congruence(&b, &q), &dense_congruence(&c, &q), 1e-6 * got, 4.0 * got);
        assert!(relative_diff(got, want) < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn direct_solver_matches_cg() {
    let mut r = rng(26);
    let a = csr_from_dense(&random_spd_dense(&mut r, 20));
    let b = random_vec(&mut r, 20);
    let (oracle, _) = cg(&a, &b, &IdentityPreconditioner, 1e-14, 200).unwrap();
    for (x, y) in sparse_direct_solve(&a, &b).unwrap().iter().zip(&oracle) {
        assert!((x - y).abs() <= 1e-9);
    }
}

#[test]
fn extremal_eigenvalues_match_the_full_spectrum() {
    let d = csr_from_dense(&[vec![1.0, 0.0], vec![0.0, 10.0]]);
    let (lo, hi) = extremal_eigs(&d, 1e-10).unwrap();
    assert!((lo - 1.0).abs() < 1e-8 && (hi - 10.0).abs() < 1e-8);

    let mut r = rng(27);
    let ad = random_spd_dense(&mut r, 30);
    let (vals, _) = symmetric_eigen(&DenseMatrix::from_rows(&ad)).unwrap();
    let want_lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let want_hi = vals.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = extremal_eigs(&csr_from_dense(&ad), 1e-8).unwrap();
    assert!(relative_diff(lo, want_lo) < 1e-6);
    assert!(relative_diff(hi, want_hi) < 1e-6);
}

#[test]
fn high_contrast_cg_reaches_tolerance_in_the_true_residual() {
    let disc = Discretization::new(&example2(1e-9, 1.0).unwrap(), Variant::Eigen, 100, 1).unwrap();
    let (a, f) = (&disc.system.matrix, &disc.system.rhs);
    let tol = 1e-12;
    for pc in [&JacobiPreconditioner::new(a).unwrap() as &dyn Preconditioner, &SgsPreconditioner::new(a)] {
        let (u, report) = cg(a, f, pc, tol, 5000).unwrap();
        let au = a.spmv(&u).unwrap();
        let r: Vec<f64> = f.iter().zip(&au).map(|(x, y)| x - y).collect();
        let rel = energy_norm(a, &r) / energy_norm(a, f);
        assert!(rel < tol, "{}: true residual {rel:e} after {} iterations", pc.name(), report.iterations);
        assert!(report.final_residual().unwrap() < tol);
    }
}
