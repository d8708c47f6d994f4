//! Finite-instance verifiers for the Lefschetz package: the hard Lefschetz
//! theorem and Hodge-Riemann relations on complete fans, their relative
//! versions on subdivisions, the convex-fan and complete-fan theorems, and
//! the small-deformation statements.

mod checks;
mod report;

pub use checks::{
    check_complete_theorem, check_convex_theorem, check_deformation, check_hl, check_hr,
    check_rhl, check_rhr, primitive_decomposition, DeformationOutcome, GSpec,
    PrimitiveDecomposition,
};
pub use report::{CheckReport, DegreeRow, Hypotheses};

use crate::fan::FanError;
use crate::pairing::PairingError;
use crate::sheaf::SheafError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LefschetzError {
    #[error("function is not certified strictly convex")]
    NotStrictlyConvex,
    #[error("function is not certified convex")]
    NotConvex,
    #[error("function is not certified relatively strictly convex")]
    NotRelativelyConvex,
    #[error("fan is not complete")]
    NotComplete,
    #[error("hard Lefschetz fails, primitive decomposition undefined")]
    HLFailed,
    #[error("pairing is degenerate: {0}")]
    PairingDegenerate(String),
    #[error("odd-degree class encountered: {0}")]
    OddDegree(String),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}
