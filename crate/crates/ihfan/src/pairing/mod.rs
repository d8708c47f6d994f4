//! Poincare duality pairings on fans: the evaluation functional on simplicial
//! fans, pairings between boundary-vanishing and plain cohomology classes on
//! quasi-convex fans, the induced nondegenerate forms on multiplicity
//! spaces, and the positive generators of functions supported on a star.

mod brion;
mod chi;
mod model;

pub use brion::EvaluationContext;
pub use chi::chi_generator;
pub use model::{IhContext, SubQuotient};

use crate::fan::{ConeId, FanError, PiecewiseLinear, SubdivisionMap};
use crate::linalg::graded::SymmetricForm;
use crate::linalg::mat::Mat;
use crate::rat::Q;
use crate::sheaf::SheafError;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PairingError {
    #[error("the evaluation sum did not clear its denominator: {0}")]
    DenominatorNotCleared(String),
    #[error("support is not quasi-convex")]
    NotQuasiConvex,
    #[error("refinement is not simplicial: {0}")]
    NotSimplicial(String),
    #[error("restricted pairing is degenerate: {0}")]
    DegenerateRestriction(String),
    #[error("no local product structure at the cone")]
    NoLocalProduct,
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

/// Poincare pairing data between boundary-vanishing and plain cohomology on a
/// quasi-convex fan: one matrix per complementary degree pair.
#[derive(Debug)]
pub struct PairingData {
    /// Total degree: the block at `d` pairs degree `total - d` (rows,
    /// boundary-vanishing side) with degree `d` (columns).
    pub total: i64,
    pub blocks: BTreeMap<i64, Mat>,
    /// The pairing composed through the inclusion on the column side, so both
    /// sides are boundary-vanishing; symmetric.
    pub symmetric: SymmetricForm,
}

impl PairingData {
    /// Nondegeneracy in every complementary degree pair.
    pub fn is_nondegenerate(&self) -> bool {
        self.blocks
            .values()
            .all(|m| m.nrows() == m.ncols() && (m.nrows() == 0 || m.rank() == m.nrows()))
    }
}

/// Computes the full pairing data of the fan underlying the context.
pub fn poincare_pairing(ctx: &IhContext) -> Result<PairingData, PairingError> {
    let n2 = 2 * ctx.base.ambient_dim() as i64;
    let mut blocks = BTreeMap::new();
    let mut d = 0;
    while d <= n2 {
        let m = ctx.pairing_block(d)?;
        // Poincare duality of dimensions makes complementary blocks square.
        if m.nrows() != m.ncols() {
            return Err(PairingError::DegenerateRestriction(format!(
                "dim IH^{d} = {} but the boundary-vanishing side at degree {} has dimension {}",
                m.ncols(),
                n2 - d,
                m.nrows()
            )));
        }
        if m.nrows() > 0 && m.rank() != m.nrows() {
            return Err(PairingError::DegenerateRestriction(format!(
                "pairing block at degree {d} has rank {} < {}",
                m.rank(),
                m.nrows()
            )));
        }
        blocks.insert(d, m);
        d += 2;
    }
    let mut symmetric = SymmetricForm::new(n2);
    let mut d = 0;
    while d <= n2 {
        if let Some(j) = ctx.j_bar(d) {
            if let Some(block) = blocks.get(&d) {
                if block.ncols() == j.nrows() {
                    symmetric.blocks.insert(d, block.mul(j));
                }
            }
        }
        d += 2;
    }
    Ok(PairingData {
        total: n2,
        blocks,
        symmetric,
    })
}

/// The symmetric form on one multiplicity space, centered at the dimension
/// of its cone (relative to the sheaf's base cone).
#[derive(Debug, Clone)]
pub struct MultiplicityForm {
    pub center: i64,
    pub dims: BTreeMap<i64, usize>,
    /// Per degree d: rows index degree `2*center - d`, columns degree `d`.
    pub blocks: BTreeMap<i64, Mat>,
}

impl MultiplicityForm {
    pub fn dim(&self, d: i64) -> usize {
        self.dims.get(&d).copied().unwrap_or(0)
    }
}

/// Per-target-cone context for relative checks: the fiber of the subdivision
/// re-embedded into its span (and further reduced by the star quotient when
/// the sheaf starts at a positive-dimensional cone), with the function
/// carried along.
pub struct FiberBlock {
    pub target_cone: ConeId,
    pub center: i64,
    pub ctx: IhContext,
    pub function: PiecewiseLinear,
}

impl FiberBlock {
    /// The multiplicity form of this block, with nondegeneracy certified.
    pub fn form(&self) -> Result<MultiplicityForm, PairingError> {
        let center = self.center;
        let mut blocks = BTreeMap::new();
        for (&d, _) in &self.ctx.w_dims {
            let m = self.ctx.w_pairing_block(d)?;
            if m.nrows() != m.ncols() || m.nrows() != self.ctx.w_dim(2 * center - d) {
                return Err(PairingError::DegenerateRestriction(format!(
                    "multiplicity dimensions at degrees {d} and {} disagree",
                    2 * center - d
                )));
            }
            if m.nrows() > 0 && m.rank() != m.nrows() {
                return Err(PairingError::DegenerateRestriction(format!(
                    "multiplicity pairing at degree {d} on cone {} is degenerate",
                    self.target_cone
                )));
            }
            blocks.insert(d, m);
        }
        Ok(MultiplicityForm {
            center,
            dims: self.ctx.w_dims.clone(),
            blocks,
        })
    }
}

/// Builds the fiber block of a subdivision over one target cone, for the
/// pushforward of the extension sheaf starting at `source_cone` (the minimal
/// cone for the intersection cohomology sheaf itself). `function` is
/// piecewise linear on the source fan. Returns `None` when the multiplicity
/// space is identically zero because the cone is off the pushed sheaf's
/// support.
pub fn fiber_block(
    map: &SubdivisionMap,
    target_cone: ConeId,
    source_cone: ConeId,
    function: &PiecewiseLinear,
) -> Result<Option<FiberBlock>, PairingError> {
    let source = &map.source;
    if !map.target.is_face(map.assignment[source_cone], target_cone) {
        return Ok(None);
    }
    let fiber = map.fiber(target_cone);
    let emb = crate::fan::subfan_in_span(source, &fiber)?;
    // Carry the function into span coordinates.
    let fiber_forms: Vec<Vec<Q>> = emb
        .fan
        .max_cones()
        .iter()
        .map(|&mc| {
            let original = emb
                .cone_map
                .iter()
                .find(|(_, &new)| new == mc)
                .map(|(&old, _)| old)
                .expect("embedded maximal cone has an original");
            let form = function.form_on_cone(source, original);
            emb.basis.transpose().mul_vec(form)
        })
        .collect();
    let mut fan = emb.fan.clone();
    let mut forms = fiber_forms;
    let mut center = map.target.cone(target_cone).dim as i64;
    if source_cone != source.minimal_cone() {
        // Reduce by the star quotient at the embedded base cone; the
        // cohomology of the extension sheaf at a cone lives on the
        // transverse fan of its star.
        let tau = emb.cone_map[&source_cone];
        let pl = PiecewiseLinear::new(&fan, forms)?;
        let q = crate::fan::star_quotient(&fan, tau)?;
        let nfib = fan.ambient_dim();
        let star_max: Vec<ConeId> = fan
            .star(tau)
            .iter()
            .copied()
            .filter(|c| fan.max_cones().contains(c))
            .collect();
        // A global linear adjustment makes the function vanish on span(tau).
        let any_form = pl.form_on_cone(&fan, star_max[0]).to_vec();
        let tau_basis = fan.span_basis(tau);
        let mut rows: Vec<Vec<Q>> = tau_basis.clone();
        let mut rhs: Vec<Q> = tau_basis
            .iter()
            .map(|b| crate::rat::dot(&any_form, b))
            .collect();
        let mut rank = if rows.is_empty() {
            0
        } else {
            Mat::from_rows(rows.clone()).rank()
        };
        for k in 0..nfib {
            if rank == nfib {
                break;
            }
            let mut e: Vec<Q> = vec![num::Zero::zero(); nfib];
            e[k] = num::One::one();
            let mut m = rows.clone();
            m.push(e.clone());
            if Mat::from_rows(m).rank() > rank {
                rows.push(e);
                rhs.push(num::Zero::zero());
                rank += 1;
            }
        }
        let g = Mat::from_rows(rows)
            .solve_vec(&rhs)
            .ok_or_else(|| PairingError::Internal("linear adjustment failed".into()))?;
        let proj_t = q.proj.transpose();
        let mut qforms: Vec<Vec<Q>> = Vec::new();
        for &mc in q.fan.max_cones() {
            let original = q
                .cone_map
                .iter()
                .filter(|(_, &new)| new == mc)
                .map(|(&old, _)| old)
                .find(|old| fan.max_cones().contains(old))
                .expect("quotient maximal cone has a maximal original");
            let adjusted = crate::rat::vec_sub(pl.form_on_cone(&fan, original), &g);
            let fq = proj_t
                .solve_vec(&adjusted)
                .ok_or_else(|| PairingError::Internal("function does not descend".into()))?;
            qforms.push(fq);
        }
        center = (map.target.cone(target_cone).dim - source.cone(source_cone).dim) as i64;
        fan = q.fan.clone();
        forms = qforms;
    }
    let function = PiecewiseLinear::new(&fan, forms)?;
    let ctx = IhContext::new(fan, None)?;
    debug_assert_eq!(ctx.base.ambient_dim() as i64, center);
    Ok(Some(FiberBlock {
        target_cone,
        center,
        ctx,
        function,
    }))
}

/// The multiplicity forms of a subdivision: one per target cone with a
/// nonzero multiplicity space.
pub fn w_form(
    map: &SubdivisionMap,
    source_cone: ConeId,
    function: &PiecewiseLinear,
) -> Result<BTreeMap<ConeId, MultiplicityForm>, PairingError> {
    let mut out = BTreeMap::new();
    for (sigma, _) in map.target.cones() {
        let Some(block) = fiber_block(map, sigma, source_cone, function)? else {
            continue;
        };
        if block.ctx.w_dims.is_empty() {
            continue;
        }
        out.insert(sigma, block.form()?);
    }
    Ok(out)
}

/// Block over a whole fan: the "fiber" is everything and the multiplicity
/// space is the image of the boundary-vanishing cohomology (the full
/// cohomology for complete fans).
pub fn whole_fan_block(
    fan: Arc<crate::fan::Fan>,
    function: &PiecewiseLinear,
) -> Result<FiberBlock, PairingError> {
    let center = fan.ambient_dim() as i64;
    let ctx = IhContext::new(fan, None)?;
    Ok(FiberBlock {
        target_cone: 0,
        center,
        ctx,
        function: function.clone(),
    })
}

#[cfg(test)]
mod tests;
