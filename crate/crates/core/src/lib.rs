//! Unfitted (XFEM) P1 discretization of elliptic interface problems with Nitsche
//! coupling, and a semi-geometric multigrid solver built on pseudo-L2 transfers.

pub mod bench;
pub mod error;
pub mod krylov;
pub mod linalg;
pub mod mesh;
pub mod multigrid;
pub mod nitsche;
pub mod space;
pub mod transfer;

pub use error::{Error, Result};
