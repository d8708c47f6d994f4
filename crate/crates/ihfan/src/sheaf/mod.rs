//! Minimal extension sheaves on fans and the machinery around them:
//! section spaces, boundary-vanishing sections, intersection cohomology,
//! pushforward along subdivisions, and decomposition into multiplicity
//! tables.
//!
//! A sheaf is modeled per cone by a free graded module over the polynomial
//! functions of the cone's span (generator degrees plus coordinate
//! operators), with degreewise restriction matrices for every face relation.
//! Everything is truncated at an even degree cap.

mod decompose;
mod minimal;
mod pushforward;
mod sections;

pub use decompose::{decompose, perverse_table, MultiplicityTable, PerverseTable};
pub use minimal::minimal_extension_sheaf;
pub use pushforward::pushforward;
pub use minimal::{apply_monomial, combine_ops};
pub use sections::{
    boundary_vanishing_sections, ih, ih_space, pl_action, quotient_from_ops, sections, IhSpace,
    SectionSpace,
};

use crate::fan::{ConeId, Fan, FanError};
use crate::linalg::graded::GradedMap;
use crate::linalg::mat::Mat;
use crate::linalg::LinalgError;
use crate::rat::Q;
use num::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SheafError {
    #[error("degree cap {cap} too low, need {needed}")]
    CapTooLow { cap: i64, needed: i64 },
    #[error("pushforward stalk failed the freeness certificate: {0}")]
    FreenessCheckFailed(String),
    #[error("decomposition sum rule violated: {0}")]
    SumRuleViolation(String),
    #[error("function does not act on the sections: {0}")]
    NotASection(String),
    #[error("support is not quasi-convex")]
    NotQuasiConvex,
    #[error("generator degree bound violated: {0}")]
    DegreeBound(String),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

/// A free graded module over the polynomial functions on the cone's span.
#[derive(Clone, Debug, Default)]
pub struct Stalk {
    /// Even generator degrees, ascending, with multiplicity. Empty means the
    /// zero stalk.
    pub gens: Vec<i64>,
    /// Number of span coordinates.
    pub vars: usize,
}

impl Stalk {
    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn dim(&self, degree: i64) -> usize {
        crate::linalg::module::free_dim(self.vars, &self.gens, degree)
    }

    pub fn basis(&self, degree: i64) -> Vec<(usize, Vec<u32>)> {
        crate::linalg::module::free_basis(self.vars, &self.gens, degree)
    }

    /// Hilbert coefficients on `[0, cap]`, step 2.
    pub fn hilbert(&self, cap: i64) -> Vec<i64> {
        let mut out = Vec::new();
        let mut d = 0;
        while d <= cap {
            out.push(self.dim(d) as i64);
            d += 2;
        }
        out
    }

    /// Generator degrees as a graded space.
    pub fn generator_space(&self) -> crate::linalg::graded::GradedSpace {
        let mut out = crate::linalg::graded::GradedSpace::new();
        for &g in &self.gens {
            out.set_dim(g, out.dim(g) + 1);
        }
        out
    }
}

/// A graded locally free flabby sheaf model, supported on the star of
/// `origin`.
#[derive(Clone, Debug)]
pub struct SheafModel {
    pub fan: Arc<Fan>,
    pub cap: i64,
    pub origin: ConeId,
    pub stalks: Vec<Stalk>,
    /// Restriction maps for every ordered face pair with nonzero stalks.
    pub res: BTreeMap<(ConeId, ConeId), GradedMap>,
    /// Per cone: the chosen span basis as ambient column vectors.
    span_bases: Vec<Mat>,
    /// Per cone: each ambient coordinate as a linear form in span coordinates
    /// (outer index: ambient coordinate).
    amb_forms: Vec<Vec<Vec<Q>>>,
    /// Per cone: each span coordinate as a linear combination of the ambient
    /// coordinates (used to assemble span-coordinate operators).
    span_in_amb: Vec<Vec<Vec<Q>>>,
}

impl SheafModel {
    pub(crate) fn new_empty(fan: Arc<Fan>, cap: i64, origin: ConeId) -> Result<Self, SheafError> {
        if !fan.is_pointed() {
            return Err(SheafError::Fan(FanError::NotPointed));
        }
        let n = fan.ambient_dim();
        let mut span_bases = Vec::with_capacity(fan.cone_count());
        let mut amb_forms = Vec::with_capacity(fan.cone_count());
        let mut span_in_amb = Vec::with_capacity(fan.cone_count());
        for (id, _) in fan.cones() {
            let basis_vecs = fan.span_basis(id);
            let d = basis_vecs.len();
            let basis = if d == 0 {
                Mat::zeros(n, 0)
            } else {
                Mat::from_cols(basis_vecs.clone())
            };
            let forms: Vec<Vec<Q>> = (0..n).map(|i| basis.row(i).to_vec()).collect();
            // Complete the span basis deterministically and take dual rows.
            let mut cols = basis_vecs;
            let mut rank = d;
            for k in 0..n {
                if rank == n {
                    break;
                }
                let mut e = vec![Q::zero(); n];
                e[k] = num::One::one();
                let mut m = cols.clone();
                m.push(e.clone());
                if Mat::from_rows(m).rank() > rank {
                    cols.push(e);
                    rank += 1;
                }
            }
            let completed = Mat::from_cols(cols);
            let inv = completed
                .inverse()
                .ok_or_else(|| SheafError::Internal("span basis completion not invertible".into()))?;
            let duals: Vec<Vec<Q>> = (0..d).map(|j| inv.row(j).to_vec()).collect();
            span_bases.push(basis);
            amb_forms.push(forms);
            span_in_amb.push(duals);
        }
        Ok(SheafModel {
            fan: fan.clone(),
            cap,
            origin,
            stalks: vec![Stalk::default(); fan.cone_count()],
            res: BTreeMap::new(),
            span_bases,
            amb_forms,
            span_in_amb,
        })
    }

    pub fn stalk(&self, cone: ConeId) -> &Stalk {
        &self.stalks[cone]
    }

    pub fn restriction(&self, from: ConeId, to: ConeId) -> Option<&GradedMap> {
        self.res.get(&(from, to))
    }

    /// Ambient coordinate `i` as a linear form in the span coordinates of
    /// `cone`.
    pub fn ambient_form(&self, cone: ConeId, i: usize) -> &[Q] {
        &self.amb_forms[cone][i]
    }

    /// Span coordinate `j` of `cone` as a combination of ambient coordinates.
    pub fn span_coordinate(&self, cone: ConeId, j: usize) -> &[Q] {
        &self.span_in_amb[cone][j]
    }

    pub fn span_basis_matrix(&self, cone: ConeId) -> &Mat {
        &self.span_bases[cone]
    }

    /// Multiplication by an ambient linear form on the stalk of `cone`, from
    /// degree `d` to `d + 2`.
    pub fn stalk_mult(&self, cone: ConeId, form_ambient: &[Q], d: i64) -> Mat {
        let stalk = &self.stalks[cone];
        let mut span_form = vec![Q::zero(); stalk.vars];
        for (i, c) in form_ambient.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, b) in self.amb_forms[cone][i].iter().enumerate() {
                span_form[j] += c.clone() * b;
            }
        }
        crate::linalg::module::free_mult_matrix(stalk.vars, &stalk.gens, d, &span_form)
    }

    /// Flabbiness: stalk-to-boundary-sections surjectivity in all degrees up
    /// to the cap, for every cone in the support.
    pub fn check_flabby(&self) -> Result<(), SheafError> {
        for (id, data) in self.fan.cones() {
            if self.stalks[id].is_zero() {
                continue;
            }
            let boundary: Vec<ConeId> = data.faces.iter().copied().filter(|&f| f != id).collect();
            let sec = sections(self, &boundary)?;
            let mut d = 0;
            while d <= self.cap {
                let m = restriction_to_sections(self, id, &sec, d)?;
                if m.rank() != sec.dim(d) {
                    return Err(SheafError::Internal(format!(
                        "stalk of cone {id} is not flabby in degree {d}"
                    )));
                }
                d += 2;
            }
        }
        Ok(())
    }
}

/// The matrix of the restriction map from a stalk into the section space of a
/// subfan of its boundary, in the section basis.
pub(crate) fn restriction_to_sections(
    model: &SheafModel,
    cone: ConeId,
    sec: &SectionSpace,
    degree: i64,
) -> Result<Mat, SheafError> {
    let stalk = model.stalk(cone);
    let src_dim = stalk.dim(degree);
    let mut cols: Vec<Vec<Q>> = Vec::new();
    for col in 0..src_dim {
        let mut unit = vec![Q::zero(); src_dim];
        unit[col] = num::One::one();
        let mut comps: BTreeMap<ConeId, Vec<Q>> = BTreeMap::new();
        for &c in &sec.cones {
            if model.stalk(c).is_zero() || c == cone {
                continue;
            }
            let r = model
                .restriction(cone, c)
                .ok_or_else(|| SheafError::Internal("missing restriction map".into()))?;
            let rows = model.stalk(c).dim(degree);
            let block = r
                .block(degree)
                .cloned()
                .unwrap_or_else(|| Mat::zeros(rows, src_dim));
            comps.insert(c, block.mul_vec(&unit));
        }
        cols.push(sec.express(degree, &comps)?);
    }
    Ok(if cols.is_empty() {
        Mat::zeros(sec.dim(degree), 0)
    } else {
        Mat::from_cols(cols)
    })
}
