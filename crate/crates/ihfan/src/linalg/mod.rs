//! Exact-rational linear algebra: matrices, feasibility LPs, graded spaces
//! and maps, degreewise modules, and multivariate polynomials.

pub mod graded;
pub mod lp;
pub mod mat;
pub mod module;
pub mod poly;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix block is not symmetric")]
    NotSymmetric,
    #[error("degree cap {cap} too low, need at least {needed}")]
    CapTooLow { cap: i64, needed: i64 },
    #[error("module is not free in degree {degree}: expected dimension {expected}, got {actual}")]
    NotFree {
        degree: i64,
        expected: usize,
        actual: usize,
    },
    #[error("Hilbert series inconsistent with generator degrees")]
    HilbertMismatch,
}
