//! Envelope (skyline) Cholesky factorization under a reverse Cuthill-McKee ordering.
//!
//! Good enough for the coarsest multigrid level and for inverse iterations on
//! meshes of a few ten thousand dofs: structured P1 stencils keep the profile at
//! roughly `n^{3/2}` entries.

use std::collections::VecDeque;

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// first stored column of each (permuted) row
    first: Vec<usize>,
    /// start of each row inside `data`; row `i` holds columns `first[i]..=i`
    start: Vec<usize>,
    data: Vec<f64>,
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&i| (degree[i], i));
    let mut neigh = Vec::new();
    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        let root = pseudo_peripheral(a, seed, &degree);
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            neigh.clear();
            neigh.extend(a.row(v).0.iter().copied().filter(|&w| !visited[w]));
            neigh.sort_by_key(|&w| (degree[w], w));
            for &w in &neigh {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, root: usize, dist: &mut [usize]) -> (usize, Vec<usize>) {
    dist.iter_mut().for_each(|d| *d = usize::MAX);
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut reached = vec![root];
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        for &w in a.row(v).0 {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                depth = depth.max(dist[w]);
                reached.push(w);
                queue.push_back(w);
            }
        }
    }
    (depth, reached)
}

fn pseudo_peripheral(a: &CsrMatrix, start: usize, degree: &[usize]) -> usize {
    let mut dist = vec![usize::MAX; a.nrows()];
    let mut root = start;
    let (mut depth, mut reached) = bfs_levels(a, root, &mut dist);
    for _ in 0..8 {
        let candidate = reached
            .iter()
            .copied()
            .filter(|&v| dist[v] == depth)
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(root);
        let (d, r) = bfs_levels(a, candidate, &mut dist);
        if d <= depth {
            break;
        }
        root = candidate;
        depth = d;
        reached = r;
    }
    root
}

impl SparseCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::dims("cholesky of a non-square matrix"));
        }
        let n = a.nrows();
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for &c in a.row(old).0 {
                let j = inv[c];
                if j < i && j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        let mut data = vec![0.0; total];
        for old in 0..n {
            let i = inv[old];
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[start[i] + j - first[i]] += v;
                }
            }
        }
        let scale = a.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (head, row_i) = data.split_at_mut(start[i]);
                let row_j = &head[start[j]..start[j + 1]];
                let li = &row_i[k0 - fi..j - fi];
                let lj = &row_j[k0 - fj..j - fj];
                let s: f64 = li.iter().zip(lj).map(|(x, y)| x * y).sum();
                let djj = row_j[j - fj];
                row_i[j - fi] = (row_i[j - fi] - s) / djj;
            }
            let row = &mut data[start[i]..start[i + 1]];
            let (off, diag) = row.split_at_mut(i - fi);
            let d = diag[0] - off.iter().map(|x| x * x).sum::<f64>();
            if !(d > 1e-15 * scale) {
                return Err(Error::NotPositiveDefinite { row: perm[i], pivot: d });
            }
            diag[0] = d.sqrt();
        }
        Ok(Self {
            n,
            perm,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn profile(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::dims(format!("rhs has length {}, factor is {}", b.len(), self.n)));
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (l, x) in row[..i - fi].iter().zip(&mut y[fi..i]) {
                *x -= l * yi;
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(x)
    }
}

/// One-shot factor-and-solve for SPD `a`.
pub fn sparse_direct_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SparseCholesky::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_2d(m: usize) -> CsrMatrix {
        let n = m * m;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                let p = j * m + i;
                t.push((p, p, 4.0));
                if i > 0 {
                    t.push((p, p - 1, -1.0));
                }
                if i + 1 < m {
                    t.push((p, p + 1, -1.0));
                }
                if j > 0 {
                    t.push((p, p - m, -1.0));
                }
                if j + 1 < m {
                    t.push((p, p + m, -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_and_diagonal() {
        let x = sparse_direct_solve(&CsrMatrix::identity(3), &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.0]);
        let x = sparse_direct_solve(&CsrMatrix::from_diagonal(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn laplacian_residual() {
        let a = laplace_2d(17);
        let b: Vec<f64> = (0..a.nrows()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let x = sparse_direct_solve(&a, &b).unwrap();
        let r = a.spmv(&x).unwrap();
        let err: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * b.iter().map(|v| v * v).sum::<f64>().sqrt());
    }

    #[test]
    fn rcm_is_a_permutation_with_isolated_nodes() {
        let mut t = vec![(0, 0, 2.0), (2, 2, 2.0), (0, 2, -1.0), (2, 0, -1.0)];
        t.push((1, 1, 1.0));
        t.push((3, 3, 1.0));
        let a = CsrMatrix::from_triplets(4, 4, &t).unwrap();
        let mut p = rcm_ordering(&a);
        p.sort();
        assert_eq!(p, vec![0, 1, 2, 3]);
        let x = sparse_direct_solve(&a, &[1.0, 2.0, 1.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14 && (x[3] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(SparseCholesky::new(&a), Err(Error::NotPositiveDefinite { .. })));
    }
}
