//! Small dense kernels for element-level matrices (at most 6x6 in practice)
//! and Lanczos tridiagonals.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { nrows, ncols, data }
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Rank-one matrix `a b^T`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::dims("dense matmul"));
        }
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.ncols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::dims("dense matvec"));
        }
        Ok((0..self.nrows)
            .map(|i| (0..self.ncols).map(|j| self[(i, j)] * x[j]).sum())
            .collect())
    }

    pub fn add_scaled(&mut self, s: f64, other: &DenseMatrix) {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `Q^T self Q`.
    pub fn congruence(&self, q: &DenseMatrix) -> Result<DenseMatrix> {
        q.transpose().matmul(&self.matmul(q)?)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    l: DenseMatrix,
}

impl DenseCholesky {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("cholesky of a non-square matrix"));
        }
        let n = a.nrows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            // pivots are judged against their own diagonal entry so that blocks of
            // very different magnitude (tiny cut parts, extreme coefficients) pass
            if !(d > 1e-14 * a[(j, j)].abs()) {
                return Err(Error::NotPositiveDefinite { row: j, pivot: d });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.l.nrows();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    /// Solves `L^T x = y` in place.
    pub fn backward(&self, b: &mut [f64]) {
        let n = self.l.nrows();
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let x = self.solve(&b.column(j));
            for i in 0..b.nrows() {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the matching eigenvectors as columns.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if !a.is_square() {
        return Err(Error::dims("eigen-decomposition of a non-square matrix"));
    }
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        let total: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum::<f64>() + 2.0 * off;
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Orthonormal basis (as columns) of the orthogonal complement of `span(kernel)`.
pub fn kernel_complement(n: usize, kernel: &[Vec<f64>]) -> Result<DenseMatrix> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in kernel {
        if k.len() != n {
            return Err(Error::dims("kernel vector length"));
        }
        if let Some(v) = orthonormalize(k.clone(), &basis) {
            basis.push(v);
        }
    }
    let kernel_dim = basis.len();
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut unit = vec![0.0; n];
        unit[e] = 1.0;
        if let Some(v) = orthonormalize(unit, &basis) {
            basis.push(v);
        }
    }
    let m = n - kernel_dim;
    Ok(DenseMatrix::from_fn(n, m, |i, j| basis[kernel_dim + j][i]))
}

fn orthonormalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return None;
    }
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-8 * norm0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

/// Largest `lambda` with `B x = lambda C x` on the orthogonal complement of `kernel`.
///
/// `B` and `C` are projected onto an orthonormal basis of `kernel`'s complement; the
/// projected `C` must be SPD. The pencil is then reduced to a standard symmetric
/// problem through the Cholesky factor of the projected `C`.
pub fn dense_generalized_eig_max(b: &DenseMatrix, c: &DenseMatrix, kernel: &[Vec<f64>]) -> Result<f64> {
    if !b.is_square() || !c.is_square() || b.nrows() != c.nrows() {
        return Err(Error::dims("generalized eigenproblem: B and C must be square and equal-sized"));
    }
    if b.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let q = kernel_complement(b.nrows(), kernel)?;
    let bp = b.congruence(&q)?;
    let cp = c.congruence(&q)?;
    let chol = DenseCholesky::new(&cp)?;
    // M = L^{-1} B' L^{-T}
    let n = bp.nrows();
    let mut tmp = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut col = bp.column(j);
        chol.forward(&mut col);
        for i in 0..n {
            tmp[(i, j)] = col[i];
        }
    }
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let mut row = tmp.row(i).to_vec();
        chol.forward(&mut row);
        for j in 0..n {
            m[(i, j)] = row[j];
        }
    }
    // symmetrize against rounding
    let m = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let (vals, _) = symmetric_eigen(&m)?;
    Ok(vals.last().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_eigen_of_diagonal_and_2x2() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let v = vecs.column(1);
        assert!((v[0].abs() - v[1].abs()).abs() < 1e-14);
    }

    #[test]
    fn cholesky_solves() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let x = DenseCholesky::new(&a).unwrap().solve(&[2.0, 1.0]);
        let r = a.matvec(&x).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-14 && (r[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(DenseCholesky::new(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal_to_kernel() {
        let k = vec![vec![1.0; 4]];
        let q = kernel_complement(4, &k).unwrap();
        assert_eq!(q.ncols(), 3);
        let qtq = q.transpose().matmul(&q).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - e).abs() < 1e-14);
            }
            assert!(q.column(i).iter().sum::<f64>().abs() < 1e-14);
        }
    }

    fn laplacian_1d(n: usize) -> DenseMatrix {
        // free-free 1D stiffness: kernel = constants
        DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if i == 0 || i == n - 1 {
                    1.0
                } else {
                    2.0
                }
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn zero_b_gives_zero() {
        let c = laplacian_1d(4);
        let b = DenseMatrix::zeros(4, 4);
        assert_eq!(dense_generalized_eig_max(&b, &c, &[vec![1.0; 4]]).unwrap(), 0.0);
    }

    #[test]
    fn identity_pencil_gives_one() {
        let c = laplacian_1d(5);
        let lam = dense_generalized_eig_max(&c, &c, &[vec![1.0; 5]]).unwrap();
        assert!((lam - 1.0).abs() < 1e-13);
    }

    #[test]
    fn singular_projected_c_is_an_error() {
        // C has a two-dimensional kernel but only one direction is deflated
        let mut c = DenseMatrix::zeros(4, 4);
        c[(0, 0)] = 1.0;
        c[(1, 1)] = 1.0;
        let b = DenseMatrix::identity(4);
        let r = dense_generalized_eig_max(&b, &c, &[vec![0.0, 0.0, 1.0, 0.0]]);
        assert!(matches!(r, Err(Error::NotPositiveDefinite { .. })));
    }
}
