use thiserror::Error;

use crate::krylov::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("zero diagonal entry at row {0}")]
    ZeroDiagonal(usize),

    #[error("degenerate cut element {element}: {reason}")]
    DegenerateElement { element: usize, reason: String },

    #[error("element {element} is intersected by more than one interface")]
    MultipleInterfaces { element: usize },

    #[error("interface {interface} runs along an edge of element {element}")]
    EdgeAlignedInterface { element: usize, interface: usize },

    #[error("subdomain {subdomain} does not touch element {element}")]
    SubdomainNotPresent { element: usize, subdomain: usize },

    #[error(
        "eigenvalue estimate did not converge after {iterations} steps \
         (lambda_min ~ {lambda_min:e}, lambda_max ~ {lambda_max:e})"
    )]
    EigenNotConverged {
        iterations: usize,
        lambda_min: f64,
        lambda_max: f64,
    },

    #[error("CG breakdown at iteration {iteration}: p^T A p = {curvature:e}")]
    Breakdown { iteration: usize, curvature: f64 },

    #[error("solver did not reach the tolerance in {} iterations", report.iterations)]
    NotConverged { report: Box<SolveReport> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
