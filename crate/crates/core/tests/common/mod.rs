#![allow(dead_code)]

use nxfem::linalg::CsrMatrix;
use nxfem::mesh::{classify_and_cut, CutDecomposition, InterfaceSet, StructuredMesh, DEFAULT_SNAP_TOL};
use nxfem::space::{build_space, EnrichedSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn dense_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = b[0].len();
    a.iter()
        .map(|row| (0..m).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum()).collect())
        .collect()
}

pub fn dense_transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// `X X^T + n I` with uniform entries of `X`.
pub fn random_spd_dense(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let x: Vec<Vec<f64>> = (0..n).map(|_| random_vec(rng, n)).collect();
    let mut a = dense_matmul(&x, &dense_transpose(&x));
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += n as f64 * 0.1;
    }
    a
}

pub fn csr_from_dense(a: &[Vec<f64>]) -> CsrMatrix {
    let mut t = Vec::new();
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    CsrMatrix::from_triplets(a.len(), a[0].len(), &t).unwrap()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| r.iter().copied().chain([bi]).collect()).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        if p != k {
            m.swap(k, p);
            det = -det;
        }
        det *= m[k][k];
        if m[k][k] == 0.0 {
            return 0.0;
        }
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

/// Largest root of `det(B - lambda C)` in `(lo, hi)`, located by scanning down
/// from `hi` for a sign change and refining by bisection.
pub fn largest_pencil_root(b: &[Vec<f64>], c: &[Vec<f64>], lo: f64, hi: f64) -> f64 {
    let f = |l: f64| {
        let m: Vec<Vec<f64>> = b
            .iter()
            .zip(c)
            .map(|(rb, rc)| rb.iter().zip(rc).map(|(x, y)| x - l * y).collect())
            .collect();
        determinant(&m)
    };
    let steps = 200_000;
    let dl = (hi - lo) / steps as f64;
    let mut right = hi;
    let fr = f(right);
    let mut left = right - dl;
    while left > lo && f(left).signum() == fr.signum() {
        right = left;
        left -= dl;
    }
    assert!(left > lo, "no root found");
    let sl = f(left).signum();
    for _ in 0..200 {
        let mid = 0.5 * (left + right);
        if f(mid).signum() == sl {
            left = mid;
        } else {
            right = mid;
        }
    }
    0.5 * (left + right)
}

/// `P^T M P` for dense `M` and `P`.
pub fn dense_congruence(m: &[Vec<f64>], p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    dense_matmul(&dense_transpose(p), &dense_matmul(m, p))
}

pub fn setup(n: usize, interfaces: &InterfaceSet) -> (StructuredMesh, CutDecomposition, EnrichedSpace) {
    let mesh = StructuredMesh::new(n);
    let decomp = classify_and_cut(&mesh, interfaces, DEFAULT_SNAP_TOL).unwrap();
    let space = build_space(&mesh, &decomp);
    (mesh, decomp, space)
}

pub fn relative_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}
