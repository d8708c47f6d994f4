//! Combinatorial intersection cohomology of polyhedral fans.
//!
//! Everything here runs over exact rationals: fans and their face lattices,
//! piecewise linear/polynomial functions with certified convexity, minimal
//! extension sheaves and their section spaces, pushforwards along subdivisions
//! and the multiplicity tables they decompose into (local h-vectors), Brion
//! evaluation and Poincare pairings, and finite-instance verifiers for the
//! Hard Lefschetz and Hodge-Riemann package (absolute, relative, convex,
//! complete and deformed variants).
//!
//! The `parallel` feature (on by default) runs the embarrassingly parallel
//! inner loops on rayon; results are bit-identical to the sequential build.

pub mod rat;

pub mod par;

pub mod linalg;

pub mod fan;

pub mod sheaf;

pub mod pairing;

pub mod lefschetz;

pub use fan::{
    barycentric_subdivision, build_fan, classify_support, complete_convex_fan, detect_local_product,
    detect_semismall, product_fan, star_subdivision, Fan, FanError, PiecewiseLinear, SubdivisionMap,
    SupportClass,
};
pub use linalg::graded::{GradedMap, GradedSpace, SymmetricForm};
pub use rat::Q;
