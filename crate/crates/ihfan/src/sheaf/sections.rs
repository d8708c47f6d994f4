//! Section spaces of a sheaf model over subfans: degreewise equalizer bases,
//! the ambient module structure, boundary-vanishing variants, and the mod-m
//! quotients (intersection cohomology).

use super::{SheafError, SheafModel};
use crate::fan::{classify_support, ConeId, PiecewiseLinear};
use crate::linalg::graded::{GradedMap, GradedSpace};
use crate::linalg::mat::Mat;
use crate::rat::Q;
use num::Zero;
use std::collections::BTreeMap;

/// Compatible tuples of stalk elements over a subfan, with coordinates on the
/// maximal (carrier) cones. Bases per degree are deterministic kernel bases.
#[derive(Clone, Debug)]
pub struct SectionSpace {
    /// The subfan (all cones, sorted).
    pub cones: Vec<ConeId>,
    /// Maximal subfan cones with nonzero stalk, in sorted order; these carry
    /// the coordinates.
    pub carriers: Vec<ConeId>,
    pub cap: i64,
    /// Per degree: stalk dimension of each carrier (aligned with `carriers`).
    carrier_dims: BTreeMap<i64, Vec<usize>>,
    /// Per degree: columns form the section basis inside the stacked carrier
    /// coordinates.
    bases: BTreeMap<i64, Mat>,
    /// Multiplication by each ambient coordinate, in section coordinates.
    pub ops: Vec<GradedMap>,
    /// Per degree and carrier: restriction data used to derive components on
    /// non-carrier cones. Stored as (cone -> (carrier index, block)).
    components: BTreeMap<(i64, ConeId), (usize, Mat)>,
}

impl SectionSpace {
    pub fn dim(&self, degree: i64) -> usize {
        self.bases.get(&degree).map(|b| b.ncols()).unwrap_or(0)
    }

    pub fn dims(&self) -> GradedSpace {
        let mut out = GradedSpace::new();
        for (&d, b) in &self.bases {
            out.set_dim(d, b.ncols());
        }
        out
    }

    pub fn basis(&self, degree: i64) -> Option<&Mat> {
        self.bases.get(&degree)
    }

    /// Stacked carrier coordinates of a section given in the basis.
    pub fn ambient_vector(&self, degree: i64, section: &[Q]) -> Vec<Q> {
        match self.bases.get(&degree) {
            Some(b) => b.mul_vec(section),
            None => vec![],
        }
    }

    fn carrier_offset(&self, degree: i64, carrier_idx: usize) -> (usize, usize) {
        let dims = &self.carrier_dims[&degree];
        let start: usize = dims[..carrier_idx].iter().sum();
        (start, dims[carrier_idx])
    }

    /// The component of a section on any cone of the subfan.
    pub fn component(
        &self,
        model: &SheafModel,
        degree: i64,
        section: &[Q],
        cone: ConeId,
    ) -> Vec<Q> {
        if model.stalk(cone).is_zero() {
            return vec![];
        }
        let amb = self.ambient_vector(degree, section);
        if let Some(idx) = self.carriers.iter().position(|&c| c == cone) {
            let (start, len) = self.carrier_offset(degree, idx);
            return amb[start..start + len].to_vec();
        }
        let (carrier_idx, block) = self
            .components
            .get(&(degree, cone))
            .expect("component data for every nonzero subfan cone");
        let (start, len) = self.carrier_offset(degree, *carrier_idx);
        block.mul_vec(&amb[start..start + len].to_vec())
    }

    /// Expresses a compatible tuple (given per carrier cone; missing entries
    /// are zero) in the section basis. Errors when the tuple is not a section.
    pub fn express(&self, degree: i64, comps: &BTreeMap<ConeId, Vec<Q>>) -> Result<Vec<Q>, SheafError> {
        let dims = match self.carrier_dims.get(&degree) {
            Some(d) => d,
            None => return Ok(vec![]),
        };
        let total: usize = dims.iter().sum();
        let mut amb = Vec::with_capacity(total);
        for (idx, &c) in self.carriers.iter().enumerate() {
            match comps.get(&c) {
                Some(v) => {
                    if v.len() != dims[idx] {
                        return Err(SheafError::Internal("component dimension mismatch".into()));
                    }
                    amb.extend(v.iter().cloned());
                }
                None => amb.extend(std::iter::repeat_with(Q::zero).take(dims[idx])),
            }
        }
        let basis = match self.bases.get(&degree) {
            Some(b) => b,
            None => {
                return if amb.iter().all(|x| x.is_zero()) {
                    Ok(vec![])
                } else {
                    Err(SheafError::NotASection("nonzero tuple in a zero space".into()))
                }
            }
        };
        let rhs = Mat::from_cols(vec![amb.clone()]);
        let sol = basis
            .solve(&rhs)
            .ok_or_else(|| SheafError::NotASection("tuple is not a compatible section".into()))?;
        let x = sol.col(0);
        if basis.mul_vec(&x) != amb {
            return Err(SheafError::NotASection("tuple is not a compatible section".into()));
        }
        Ok(x)
    }
}

/// Sections of the model over a subfan (which must be closed under faces),
/// carrying the ambient coordinate operators. With `vanish_on` nonempty, the
/// sections are additionally required to vanish on those cones.
pub(crate) fn sections_with_constraints(
    model: &SheafModel,
    subfan: &[ConeId],
    vanish_on: &[ConeId],
) -> Result<SectionSpace, SheafError> {
    let fan = &model.fan;
    let mut cones: Vec<ConeId> = subfan.to_vec();
    cones.sort_unstable();
    cones.dedup();
    for &c in &cones {
        for &f in &fan.cone(c).faces {
            if cones.binary_search(&f).is_err() {
                return Err(SheafError::Internal("subfan is not closed under faces".into()));
            }
        }
    }
    // Carriers: maximal among the nonzero-stalk cones.
    let live: Vec<ConeId> = cones
        .iter()
        .copied()
        .filter(|&c| !model.stalk(c).is_zero())
        .collect();
    let live_set: std::collections::BTreeSet<ConeId> = live.iter().copied().collect();
    let carriers: Vec<ConeId> = live
        .iter()
        .copied()
        .filter(|&c| {
            fan.star(c)
                .iter()
                .all(|&up| up == c || !live_set.contains(&up) || cones.binary_search(&up).is_err())
        })
        .collect();
    // For every live non-carrier cone: the carriers above it.
    let mut above: BTreeMap<ConeId, Vec<usize>> = BTreeMap::new();
    for &c in &live {
        if carriers.contains(&c) {
            continue;
        }
        let ups: Vec<usize> = carriers
            .iter()
            .enumerate()
            .filter(|(_, &car)| fan.is_face(c, car))
            .map(|(i, _)| i)
            .collect();
        debug_assert!(!ups.is_empty());
        above.insert(c, ups);
    }
    let degrees: Vec<i64> = (0..=model.cap).step_by(2).collect();
    struct DegreeData {
        dims: Vec<usize>,
        basis: Mat,
        components: Vec<(ConeId, (usize, Mat))>,
    }
    let per_degree: Vec<Result<DegreeData, SheafError>> = crate::par::map_slice(&degrees, |&d| {
        let dims: Vec<usize> = carriers.iter().map(|&c| model.stalk(c).dim(d)).collect();
        let total: usize = dims.iter().sum();
        let offset = |idx: usize| -> usize { dims[..idx].iter().sum() };
        let mut rows: Vec<Vec<Q>> = Vec::new();
        let mut components: Vec<(ConeId, (usize, Mat))> = Vec::new();
        for (&c, ups) in &above {
            let target = model.stalk(c).dim(d);
            let blocks: Vec<Mat> = ups
                .iter()
                .map(|&ci| {
                    let r = model
                        .restriction(carriers[ci], c)
                        .expect("restriction for live face pair");
                    r.block(d)
                        .cloned()
                        .unwrap_or_else(|| Mat::zeros(target, dims[ci]))
                })
                .collect();
            components.push((c, (ups[0], blocks[0].clone())));
            for (k, &ci) in ups.iter().enumerate().skip(1) {
                for t in 0..target {
                    let mut row = vec![Q::zero(); total];
                    for j in 0..dims[ups[0]] {
                        row[offset(ups[0]) + j] = blocks[0].get(t, j).clone();
                    }
                    for j in 0..dims[ci] {
                        let v = row[offset(ci) + j].clone() - blocks[k].get(t, j);
                        row[offset(ci) + j] = v;
                    }
                    rows.push(row);
                }
            }
        }
        // Vanishing constraints: components on the given cones are zero.
        for &b in vanish_on {
            if model.stalk(b).is_zero() {
                continue;
            }
            let target = model.stalk(b).dim(d);
            if let Some(ci) = carriers.iter().position(|&c| c == b) {
                for t in 0..target {
                    let mut row = vec![Q::zero(); total];
                    row[offset(ci) + t] = num::One::one();
                    rows.push(row);
                }
            } else {
                let ups: Vec<usize> = carriers
                    .iter()
                    .enumerate()
                    .filter(|(_, &car)| fan.is_face(b, car))
                    .map(|(i, _)| i)
                    .collect();
                let ci = ups[0];
                let r = model.restriction(carriers[ci], b).expect("restriction");
                let block = r
                    .block(d)
                    .cloned()
                    .unwrap_or_else(|| Mat::zeros(target, dims[ci]));
                for t in 0..target {
                    let mut row = vec![Q::zero(); total];
                    for j in 0..dims[ci] {
                        row[offset(ci) + j] = block.get(t, j).clone();
                    }
                    rows.push(row);
                }
            }
        }
        let constraint = if rows.is_empty() {
            Mat::zeros(0, total)
        } else {
            Mat::from_rows(rows)
        };
        let basis = constraint.kernel_basis();
        Ok(DegreeData {
            dims,
            basis,
            components,
        })
    });
    let mut carrier_dims = BTreeMap::new();
    let mut bases = BTreeMap::new();
    let mut components = BTreeMap::new();
    for (&d, data) in degrees.iter().zip(per_degree) {
        let data = data?;
        carrier_dims.insert(d, data.dims);
        bases.insert(d, data.basis);
        for (c, entry) in data.components {
            components.insert((d, c), entry);
        }
    }
    let mut space = SectionSpace {
        cones,
        carriers,
        cap: model.cap,
        carrier_dims,
        bases,
        ops: Vec::new(),
        components,
    };
    // Ambient coordinate operators in section coordinates.
    let n = fan.ambient_dim();
    let ops: Vec<GradedMap> = crate::par::map_range(n, |i| {
        let mut form = vec![Q::zero(); n];
        form[i] = num::One::one();
        operator_from_form(model, &space, &form).expect("coordinate multiplication closes on sections")
    });
    space.ops = ops;
    Ok(space)
}

/// Multiplication by an ambient linear form, carrier-wise, expressed in the
/// section bases.
fn operator_from_form(
    model: &SheafModel,
    space: &SectionSpace,
    form: &[Q],
) -> Result<GradedMap, SheafError> {
    let mut out = GradedMap::new(2);
    let mut d = 0;
    while d + 2 <= space.cap {
        let src = space
            .bases
            .get(&d)
            .ok_or_else(|| SheafError::Internal("missing source degree".into()))?;
        let dst_dims = &space.carrier_dims[&(d + 2)];
        let total_dst: usize = dst_dims.iter().sum();
        let mut mult = Mat::zeros(total_dst, src.nrows());
        let mut dst_off = 0;
        let mut src_off = 0;
        for (idx, &c) in space.carriers.iter().enumerate() {
            let block = model.stalk_mult(c, form, d);
            for r in 0..block.nrows() {
                for k in 0..block.ncols() {
                    mult.set(dst_off + r, src_off + k, block.get(r, k).clone());
                }
            }
            dst_off += dst_dims[idx];
            src_off += space.carrier_dims[&d][idx];
        }
        let image = mult.mul(src);
        let dst_basis = space
            .bases
            .get(&(d + 2))
            .ok_or_else(|| SheafError::Internal("missing target degree".into()))?;
        let sol = dst_basis
            .solve(&image)
            .ok_or_else(|| SheafError::NotASection("multiplication leaves the section space".into()))?;
        if &dst_basis.mul(&sol) != &image {
            return Err(SheafError::NotASection(
                "multiplication leaves the section space".into(),
            ));
        }
        out.insert_block(d, sol);
        d += 2;
    }
    Ok(out)
}

/// Sections over a subfan (closed under faces).
pub fn sections(model: &SheafModel, subfan: &[ConeId]) -> Result<SectionSpace, SheafError> {
    sections_with_constraints(model, subfan, &[])
}

/// Global sections vanishing on the boundary of a quasi-convex fan.
pub fn boundary_vanishing_sections(model: &SheafModel) -> Result<SectionSpace, SheafError> {
    let class = classify_support(&model.fan)?;
    if !class.is_quasi_convex() {
        return Err(SheafError::NotQuasiConvex);
    }
    let all: Vec<ConeId> = (0..model.fan.cone_count()).collect();
    let walls = crate::fan::boundary_walls(&model.fan);
    sections_with_constraints(model, &all, &walls)
}

/// The mod-m quotient of a section space: dimensions, a deterministic basis
/// of representatives, and projections for descending operators.
#[derive(Clone, Debug)]
pub struct IhSpace {
    pub dims: GradedSpace,
    /// Per degree: section-basis indices of the representative classes.
    pub lifts: BTreeMap<i64, Vec<usize>>,
    /// Per degree: projection matrix (quotient dim x section dim).
    pub proj: BTreeMap<i64, Mat>,
}

impl IhSpace {
    /// Induced map on the quotient of a degree-2 operator on sections.
    pub fn descend(&self, op: &GradedMap) -> GradedMap {
        let mut out = GradedMap::new(op.shift);
        for (&d, lifts) in &self.lifts {
            let Some(block) = op.block(d) else { continue };
            let Some(p) = self.proj.get(&(d + op.shift)) else {
                if !lifts.is_empty() {
                    out.insert_block(d, Mat::zeros(0, lifts.len()));
                }
                continue;
            };
            let cols: Vec<Vec<Q>> = lifts.iter().map(|&i| p.mul_vec(&block.col(i))).collect();
            let m = if cols.is_empty() {
                Mat::zeros(p.nrows(), 0)
            } else {
                Mat::from_cols(cols)
            };
            out.insert_block(d, m);
        }
        out
    }

    /// Quotient coordinates of a section.
    pub fn project(&self, degree: i64, section: &[Q]) -> Vec<Q> {
        match self.proj.get(&degree) {
            Some(p) => p.mul_vec(section),
            None => vec![],
        }
    }

    /// Section-coordinate representative of a quotient class.
    pub fn lift(&self, degree: i64, class: &[Q], section_dim: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); section_dim];
        if let Some(lifts) = self.lifts.get(&degree) {
            for (k, &idx) in lifts.iter().enumerate() {
                v[idx] = class[k].clone();
            }
        }
        v
    }
}

/// Builds the mod-m structure of a section space.
pub fn ih_space(space: &SectionSpace) -> IhSpace {
    let dims: BTreeMap<i64, usize> = (0..=space.cap)
        .step_by(2)
        .map(|d| (d, space.dim(d)))
        .collect();
    quotient_from_ops(&dims, &space.ops, space.cap)
}

/// The quotient of a graded space (given by per-degree dimensions) by the
/// image of a tuple of degree-2 operators, with deterministic lifts.
pub fn quotient_from_ops(
    space_dims: &BTreeMap<i64, usize>,
    ops: &[GradedMap],
    cap: i64,
) -> IhSpace {
    let mut dims = GradedSpace::new();
    let mut lifts = BTreeMap::new();
    let mut proj = BTreeMap::new();
    let mut d = 0;
    while d <= cap {
        let dim = space_dims.get(&d).copied().unwrap_or(0);
        if dim == 0 {
            d += 2;
            continue;
        }
        // Image of degree d-2 under all operators.
        let mut img = Mat::zeros(dim, 0);
        for op in ops {
            if let Some(b) = op.block(d - 2) {
                if b.nrows() == dim {
                    img = img.hstack(b);
                }
            }
        }
        let (_, pivots) = img.transpose().rref();
        let pivot_rows: std::collections::BTreeSet<usize> = pivots.into_iter().collect();
        let lift_idx: Vec<usize> = (0..dim).filter(|i| !pivot_rows.contains(i)).collect();
        // Basis change [image basis | lifted units] and its inverse rows.
        let (_, img_pivots) = img.rref();
        let mut cols: Vec<Vec<Q>> = img_pivots.iter().map(|&c| img.col(c)).collect();
        for &i in &lift_idx {
            let mut e = vec![Q::zero(); dim];
            e[i] = num::One::one();
            cols.push(e);
        }
        let change = Mat::from_cols(cols);
        let inv = change.inverse().expect("complement basis is invertible");
        let mut p = Mat::zeros(lift_idx.len(), dim);
        let img_rank = img_pivots.len();
        for (r, _) in lift_idx.iter().enumerate() {
            for c in 0..dim {
                p.set(r, c, inv.get(img_rank + r, c).clone());
            }
        }
        dims.set_dim(d, lift_idx.len());
        lifts.insert(d, lift_idx);
        proj.insert(d, p);
        d += 2;
    }
    IhSpace { dims, lifts, proj }
}

/// Intersection cohomology of the fan carrying the model: global sections
/// (boundary-vanishing when `relative`) modulo the ambient maximal ideal.
pub fn ih(model: &SheafModel, relative: bool) -> Result<GradedSpace, SheafError> {
    let space = if relative {
        boundary_vanishing_sections(model)?
    } else {
        let all: Vec<ConeId> = (0..model.fan.cone_count()).collect();
        sections(model, &all)?
    };
    Ok(ih_space(&space).dims)
}

/// Multiplication by a piecewise linear function on a section space, in
/// section coordinates. The function must be piecewise linear on the model's
/// fan.
pub fn pl_action(
    model: &SheafModel,
    space: &SectionSpace,
    f: &PiecewiseLinear,
) -> Result<GradedMap, SheafError> {
    let fan = &model.fan;
    let mut out = GradedMap::new(2);
    let mut d = 0;
    while d + 2 <= space.cap {
        let src = space
            .basis(d)
            .ok_or_else(|| SheafError::Internal("missing source degree".into()))?;
        let dst_dims = &space.carrier_dims[&(d + 2)];
        let total_dst: usize = dst_dims.iter().sum();
        let mut mult = Mat::zeros(total_dst, src.nrows());
        let mut dst_off = 0;
        let mut src_off = 0;
        for (idx, &c) in space.carriers.iter().enumerate() {
            let form = f.form_on_cone(fan, c);
            let block = model.stalk_mult(c, form, d);
            for r in 0..block.nrows() {
                for k in 0..block.ncols() {
                    mult.set(dst_off + r, src_off + k, block.get(r, k).clone());
                }
            }
            dst_off += dst_dims[idx];
            src_off += space.carrier_dims[&d][idx];
        }
        let image = mult.mul(src);
        let dst_basis = space
            .bases
            .get(&(d + 2))
            .ok_or_else(|| SheafError::Internal("missing target degree".into()))?;
        let sol = dst_basis.solve(&image).ok_or_else(|| {
            SheafError::NotASection("piecewise multiplication leaves the sections".into())
        })?;
        if &dst_basis.mul(&sol) != &image {
            return Err(SheafError::NotASection(
                "piecewise multiplication leaves the sections".into(),
            ));
        }
        out.insert_block(d, sol);
        d += 2;
    }
    Ok(out)
}
