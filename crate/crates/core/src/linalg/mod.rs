//! Dense and sparse kernels.

mod cholesky;
mod csr;
mod dense;
mod lanczos;

pub use cholesky::{rcm_ordering, sparse_direct_solve, SparseCholesky};
pub use csr::{axpy, dot, norm2, triple_product, CsrMatrix};
pub use dense::{dense_generalized_eig_max, kernel_complement, symmetric_eigen, DenseCholesky, DenseMatrix};
pub use lanczos::{
    extremal_eigs, extremal_eigs_with_inverse, lanczos_max, tridiagonal_max, DIRECT_INVERSE_LIMIT,
};
