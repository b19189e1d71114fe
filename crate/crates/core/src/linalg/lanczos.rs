//! Extremal eigenvalue estimates for large SPD operators.

use super::cholesky::SparseCholesky;
use super::csr::{dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

/// Dimension above which `extremal_eigs` refuses to factor the matrix.
pub const DIRECT_INVERSE_LIMIT: usize = 50_000;

const MAX_STEPS: usize = 300;

/// Largest eigenvalue of the symmetric operator `op` of size `n`, by Lanczos with
/// full reorthogonalization. Stops when the Ritz residual bound drops below
/// `tol * theta`, or when the Ritz value has moved by less than `tol * theta / 100`
/// in each of the last three steps (a clustered top of the spectrum keeps the
/// residual bound large long after the value itself has settled).
pub fn lanczos_max(n: usize, mut op: impl FnMut(&[f64]) -> Result<Vec<f64>>, tol: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::dims("empty operator"));
    }
    let steps = MAX_STEPS.min(n);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin()).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    let mut settled = 0;
    for k in 0..steps {
        let mut w = op(&basis[k])?;
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        for q in &basis {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        // second pass keeps the basis orthogonal to working precision
        for q in &basis {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let b = norm2(&w);
        let (t, last) = tridiagonal_max(&alpha, &beta);
        if k > 0 && (t - theta).abs() <= 1e-2 * tol * t.abs() {
            settled += 1;
        } else {
            settled = 0;
        }
        theta = t;
        let bound = (b * last).abs();
        if bound <= tol * theta.abs() || settled >= 3 || k + 1 == n || b <= 1e-14 * theta.abs() {
            log::debug!(target: "nxfem::lanczos", "n={n} steps={} theta={theta:.6e} bound={bound:.2e}", k + 1);
            return Ok(theta);
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    Err(Error::EigenNotConverged {
        iterations: steps,
        lambda_min: f64::NAN,
        lambda_max: theta,
    })
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e`, together with the last component of its unit eigenvector.
pub fn tridiagonal_max(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    e.truncate(n);
    // only the last row of the eigenvector matrix is tracked
    let mut z = vec![0.0; n];
    z[n - 1] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let k = (0..n).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap_or(0);
    (d[k], z[k])
}

/// `(lambda_min, lambda_max)` of an SPD matrix. `lambda_min` comes from Lanczos on
/// `A^{-1}` applied through a sparse Cholesky factor.
pub fn extremal_eigs(a: &CsrMatrix, tol: f64) -> Result<(f64, f64)> {
    if a.nrows() > DIRECT_INVERSE_LIMIT {
        return Err(Error::Config(format!(
            "extremal_eigs factors the matrix; {} dofs exceeds the limit of {}",
            a.nrows(),
            DIRECT_INVERSE_LIMIT
        )));
    }
    let chol = SparseCholesky::new(a)?;
    extremal_eigs_with_inverse(a, tol, |r| chol.solve(r))
}

/// Like [`extremal_eigs`] but with a caller-supplied (accurate) inverse.
pub fn extremal_eigs_with_inverse(
    a: &CsrMatrix,
    tol: f64,
    inverse: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<(f64, f64)> {
    let lmax = lanczos_max(a.nrows(), |x| a.spmv(x), tol)?;
    let inv_max = match lanczos_max(a.nrows(), inverse, tol) {
        Ok(v) => v,
        Err(Error::EigenNotConverged { iterations, lambda_max, .. }) => {
            return Err(Error::EigenNotConverged {
                iterations,
                lambda_min: 1.0 / lambda_max,
                lambda_max: lmax,
            })
        }
        Err(e) => return Err(e),
    };
    if !(inv_max > 0.0) {
        return Err(Error::NotPositiveDefinite { row: 0, pivot: inv_max });
    }
    Ok((1.0 / inv_max, lmax))
}
