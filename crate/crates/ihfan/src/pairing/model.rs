//! Concrete realization of the minimal extension sheaf inside the piecewise
//! polynomials of a simplicial refinement, and everything computed through
//! it: intersection cohomology with explicit representatives, the Poincare
//! pairing via the evaluation functional, the canonical multiplicity
//! subspace, and actions of piecewise linear functions.

use super::brion::EvaluationContext;
use super::PairingError;
use crate::fan::{
    barycentric_subdivision, classify_support, ConeId, Fan, PiecewiseLinear, PiecewisePoly,
    SubdivisionMap, SupportClass,
};
use crate::linalg::graded::{GradedMap, GradedSpace};
use crate::linalg::mat::Mat;
use crate::linalg::poly::Poly;
use crate::rat::Q;
use crate::sheaf::{
    apply_monomial, minimal_extension_sheaf, pl_action, quotient_from_ops, sections, IhSpace,
    SectionSpace, SheafModel,
};
use num::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A graded subspace of a section space, closed under the ambient module
/// structure, together with its mod-m quotient.
#[derive(Clone, Debug)]
pub struct SubQuotient {
    /// Per degree: columns are the subspace basis in host-section
    /// coordinates.
    pub bases: BTreeMap<i64, Mat>,
    /// Ambient coordinate operators in subspace coordinates.
    pub ops: Vec<GradedMap>,
    pub quot: IhSpace,
}

impl SubQuotient {
    pub fn dim(&self, d: i64) -> usize {
        self.bases.get(&d).map(|b| b.ncols()).unwrap_or(0)
    }
}

/// Builds a subspace-with-quotient from per-degree bases inside the host.
fn sub_quotient(
    host: &SectionSpace,
    bases: BTreeMap<i64, Mat>,
    cap: i64,
) -> Result<SubQuotient, PairingError> {
    let mut ops = Vec::new();
    for host_op in &host.ops {
        let mut op = GradedMap::new(2);
        let mut d = 0;
        while d + 2 <= cap {
            let src = &bases[&d];
            let dst = &bases[&(d + 2)];
            let block = host_op
                .block(d)
                .cloned()
                .unwrap_or_else(|| Mat::zeros(host.dim(d + 2), host.dim(d)));
            let image = block.mul(src);
            let sol = dst
                .solve(&image)
                .filter(|s| &dst.mul(s) == &image)
                .ok_or_else(|| {
                    PairingError::Internal("subspace is not closed under the module action".into())
                })?;
            op.insert_block(d, sol);
            d += 2;
        }
        ops.push(op);
    }
    let dims: BTreeMap<i64, usize> = bases.iter().map(|(&d, b)| (d, b.ncols())).collect();
    let quot = quotient_from_ops(&dims, &ops, cap);
    Ok(SubQuotient { bases, ops, quot })
}

/// Rows vanishing exactly on the column space of `basis` inside an ambient
/// space of the given dimension.
fn complement_detector(basis: &Mat, ambient: usize) -> Mat {
    let (rref_t, pivots) = basis.transpose().rref();
    let pivot_rows: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let free: Vec<usize> = (0..ambient).filter(|i| !pivot_rows.contains(i)).collect();
    let rank = pivots.len();
    let mut cols: Vec<Vec<Q>> = (0..rank).map(|r| rref_t.row(r).to_vec()).collect();
    for &i in &free {
        let mut e = vec![Q::zero(); ambient];
        e[i] = num::One::one();
        cols.push(e);
    }
    if cols.is_empty() {
        return Mat::zeros(0, ambient);
    }
    let change = Mat::from_cols(cols);
    let inv = change.inverse().expect("complement change of basis");
    let mut out = Mat::zeros(free.len(), ambient);
    for r in 0..free.len() {
        for c in 0..ambient {
            out.set(r, c, inv.get(rank + r, c).clone());
        }
    }
    out
}

/// The j-th span coordinate of a cone as an ambient covector, with the
/// deterministic complement convention.
fn span_coordinate_of(fan: &Fan, cone: ConeId, j: usize) -> Vec<Q> {
    let n = fan.ambient_dim();
    let mut cols = fan.span_basis(cone);
    let d = cols.len();
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
    let inv = completed.inverse().expect("span completion invertible");
    inv.row(j).to_vec()
}

/// Linear combination of a section space's ambient operators by an ambient
/// covector.
fn combine_section_ops(sec: &SectionSpace, form: &[Q]) -> GradedMap {
    let mut out = GradedMap::new(2);
    let mut degrees: std::collections::BTreeSet<i64> = std::collections::BTreeSet::new();
    for op in &sec.ops {
        degrees.extend(op.blocks.keys().copied());
    }
    for d in degrees {
        let mut acc: Option<Mat> = None;
        for (op, c) in sec.ops.iter().zip(form) {
            let Some(b) = op.block(d) else { continue };
            let scaled = b.scale(c);
            acc = Some(match acc {
                None => scaled,
                Some(a) => a.add(&scaled),
            });
        }
        if let Some(m) = acc {
            out.insert_block(d, m);
        }
    }
    out
}

/// Matrix taking coordinates of one section space to the coordinates of a
/// section space over a smaller subfan.
fn restriction_matrix(
    model: &SheafModel,
    from: &SectionSpace,
    to: &SectionSpace,
    d: i64,
) -> Result<Mat, PairingError> {
    let rows = to.dim(d);
    let cols = from.dim(d);
    let mut out = Mat::zeros(rows, cols);
    for col in 0..cols {
        let mut unit = vec![Q::zero(); cols];
        unit[col] = num::One::one();
        let mut comps: BTreeMap<ConeId, Vec<Q>> = BTreeMap::new();
        for &c in &to.carriers {
            comps.insert(c, from.component(model, d, &unit, c));
        }
        let v = to.express(d, &comps).map_err(PairingError::from)?;
        for (r, x) in v.into_iter().enumerate() {
            out.set(r, col, x);
        }
    }
    Ok(out)
}

/// The concrete computation context for one quasi-convex pointed fan.
pub struct IhContext {
    pub base: Arc<Fan>,
    pub map: SubdivisionMap,
    pub structure: SheafModel,
    pub eval: EvaluationContext,
    pub cap: i64,
    pub class: SupportClass,
    host: SectionSpace,
    pub plain: SubQuotient,
    pub bv: SubQuotient,
    /// Generator degrees of the concrete extension module, per base cone.
    pub stalk_gens: BTreeMap<ConeId, Vec<i64>>,
    bv_in_plain: BTreeMap<i64, Mat>,
    j_bar: BTreeMap<i64, Mat>,
    pub w_dims: BTreeMap<i64, usize>,
    w_plain: BTreeMap<i64, Mat>,
    w_pre: BTreeMap<i64, Mat>,
}

impl IhContext {
    /// Builds the context, refining simplicially (full barycentric by
    /// default) and realizing the extension sheaf concretely inside the
    /// refinement's piecewise polynomials.
    pub fn new(base: Arc<Fan>, refinement: Option<SubdivisionMap>) -> Result<Self, PairingError> {
        let class = classify_support(&base)?;
        if !class.is_quasi_convex() {
            return Err(PairingError::NotQuasiConvex);
        }
        let map = match refinement {
            Some(m) => {
                if !m.source.is_simplicial() {
                    return Err(PairingError::NotSimplicial(
                        "supplied refinement is not simplicial".into(),
                    ));
                }
                m
            }
            None => {
                if base.is_simplicial() {
                    SubdivisionMap::identity(base.clone())
                } else {
                    let (_, m, _) = barycentric_subdivision(&base)?;
                    m
                }
            }
        };
        let n = base.ambient_dim();
        let cap = 2 * n as i64 + 2;
        let structure = minimal_extension_sheaf(&map.source, map.source.minimal_cone(), cap)?;
        let eval = EvaluationContext::new(&map.source)?;
        let all: Vec<ConeId> = (0..map.source.cone_count()).collect();
        let host = sections(&structure, &all)?;
        // Concrete submodule bases per base cone, built in increasing order.
        let mut fiber_secs: BTreeMap<ConeId, SectionSpace> = BTreeMap::new();
        let mut sub_bases: BTreeMap<(ConeId, i64), Mat> = BTreeMap::new();
        let mut stalk_gens: BTreeMap<ConeId, Vec<i64>> = BTreeMap::new();
        for (sigma, sdata) in base.cones() {
            let fiber = map.fiber(sigma);
            let sec = sections(&structure, &fiber)?;
            let (gens, reps): (Vec<i64>, Vec<(i64, Vec<Q>)>) = if sigma == base.minimal_cone() {
                let mut comps: BTreeMap<ConeId, Vec<Q>> = BTreeMap::new();
                for &c in &sec.carriers {
                    comps.insert(c, vec![num::One::one()]);
                }
                let unit = sec.express(0, &comps).map_err(PairingError::from)?;
                (vec![0], vec![(0, unit)])
            } else {
                let boundary_fiber: Vec<ConeId> = fiber
                    .iter()
                    .copied()
                    .filter(|&c| map.assignment[c] != sigma)
                    .collect();
                let bsec = sections(&structure, &boundary_fiber)?;
                // Intersect the membership conditions of all proper faces.
                let mut bases: BTreeMap<i64, Mat> = BTreeMap::new();
                let mut d = 0;
                while d <= cap {
                    let mut basis = Mat::identity(bsec.dim(d));
                    for &rho in &sdata.faces {
                        if rho == sigma {
                            continue;
                        }
                        let rho_sec = &fiber_secs[&rho];
                        let sub = &sub_bases[&(rho, d)];
                        let restrict = restriction_matrix(&structure, &bsec, rho_sec, d)?;
                        let detector = complement_detector(sub, rho_sec.dim(d));
                        let cond = detector.mul(&restrict).mul(&basis);
                        basis = basis.mul(&cond.kernel_basis());
                    }
                    bases.insert(d, basis);
                    d += 2;
                }
                let sub = sub_quotient(&bsec, bases.clone(), cap)?;
                let mut gens: Vec<i64> = Vec::new();
                let mut reps: Vec<(i64, Vec<Q>)> = Vec::new();
                for (d, k) in sub.quot.dims.iter() {
                    for idx in 0..k {
                        let lift_idx = sub.quot.lifts[&d][idx];
                        let bvec = bases[&d].col(lift_idx);
                        let r = restriction_matrix(&structure, &sec, &bsec, d)?;
                        let lifted = r.solve_vec(&bvec).ok_or_else(|| {
                            PairingError::Internal("flabbiness lift failed".into())
                        })?;
                        gens.push(d);
                        reps.push((d, lifted));
                    }
                }
                (gens, reps)
            };
            // Degree bound: generators sit strictly below the cone dimension.
            if let Some(&top) = gens.iter().max() {
                if sigma != base.minimal_cone() && top >= sdata.dim as i64 {
                    return Err(PairingError::Internal(format!(
                        "extension generator of degree {top} at a {}-dimensional cone",
                        sdata.dim
                    )));
                }
            }
            // Span the free submodule from the generators.
            let span_ops: Vec<GradedMap> = (0..sdata.dim)
                .map(|j| combine_section_ops(&sec, &span_coordinate_of(&base, sigma, j)))
                .collect();
            let mut d = 0;
            while d <= cap {
                let basis = crate::linalg::module::free_basis(sdata.dim, &gens, d);
                let mut cols: Vec<Vec<Q>> = Vec::with_capacity(basis.len());
                for (k, e) in &basis {
                    let (g, rep) = &reps[*k];
                    cols.push(apply_monomial(&span_ops, e, *g, rep));
                }
                let m = if cols.is_empty() {
                    Mat::zeros(sec.dim(d), 0)
                } else {
                    Mat::from_cols(cols)
                };
                if m.rank() != m.ncols() {
                    return Err(PairingError::Internal(
                        "concrete extension module is not free".into(),
                    ));
                }
                sub_bases.insert((sigma, d), m);
                d += 2;
            }
            stalk_gens.insert(sigma, gens);
            fiber_secs.insert(sigma, sec);
        }
        // Global subspace: membership at the maximal base cones.
        let mut plain_bases: BTreeMap<i64, Mat> = BTreeMap::new();
        let mut d = 0;
        while d <= cap {
            let mut basis = Mat::identity(host.dim(d));
            for &sigma in base.max_cones() {
                let sec = &fiber_secs[&sigma];
                let sub = &sub_bases[&(sigma, d)];
                let restrict = restriction_matrix(&structure, &host, sec, d)?;
                let detector = complement_detector(sub, sec.dim(d));
                let cond = detector.mul(&restrict).mul(&basis);
                basis = basis.mul(&cond.kernel_basis());
            }
            plain_bases.insert(d, basis);
            d += 2;
        }
        let plain = sub_quotient(&host, plain_bases, cap)?;
        // Boundary-vanishing subspace inside the plain one.
        let boundary = crate::fan::boundary_walls(&base);
        let mut bv_bases: BTreeMap<i64, Mat> = BTreeMap::new();
        let mut bv_in_plain: BTreeMap<i64, Mat> = BTreeMap::new();
        let mut d = 0;
        while d <= cap {
            let pb = &plain.bases[&d];
            let mut rows = Mat::zeros(0, pb.ncols());
            for &w in &boundary {
                for c in map.source.subfan_maximal(&map.fiber(w)) {
                    let dim_c = structure.stalk(c).dim(d);
                    let mut block = Mat::zeros(dim_c, pb.ncols());
                    for col in 0..pb.ncols() {
                        let hv = pb.col(col);
                        let comp = host.component(&structure, d, &hv, c);
                        for (r, x) in comp.into_iter().enumerate() {
                            block.set(r, col, x);
                        }
                    }
                    rows = rows.vstack(&block);
                }
            }
            let k = rows.kernel_basis();
            bv_in_plain.insert(d, k.clone());
            bv_bases.insert(d, pb.mul(&k));
            d += 2;
        }
        let bv = sub_quotient(&host, bv_bases, cap)?;
        // Quotient-level inclusion and the canonical multiplicity subspace.
        let mut j_bar: BTreeMap<i64, Mat> = BTreeMap::new();
        let mut w_dims = BTreeMap::new();
        let mut w_plain = BTreeMap::new();
        let mut w_pre = BTreeMap::new();
        let mut d = 0;
        while d <= cap {
            let bdim = bv.quot.dims.dim(d);
            let pdim = plain.quot.dims.dim(d);
            let mut j = Mat::zeros(pdim, bdim);
            for col in 0..bdim {
                let mut class = vec![Q::zero(); bdim];
                class[col] = num::One::one();
                let bv_sub = bv.quot.lift(d, &class, bv.dim(d));
                let plain_sub = bv_in_plain[&d].mul_vec(&bv_sub);
                let projected = plain.quot.project(d, &plain_sub);
                for (r, x) in projected.into_iter().enumerate() {
                    j.set(r, col, x);
                }
            }
            let (_, pivots) = j.rref();
            if !pivots.is_empty() {
                w_dims.insert(d, pivots.len());
                w_plain.insert(
                    d,
                    Mat::from_cols(pivots.iter().map(|&c| j.col(c)).collect()),
                );
                let mut pre = Mat::zeros(bdim, pivots.len());
                for (k, &c) in pivots.iter().enumerate() {
                    pre.set(c, k, num::One::one());
                }
                w_pre.insert(d, pre);
            }
            j_bar.insert(d, j);
            d += 2;
        }
        Ok(IhContext {
            base,
            map,
            structure,
            eval,
            cap,
            class,
            host,
            plain,
            bv,
            stalk_gens,
            bv_in_plain,
            j_bar,
            w_dims,
            w_plain,
            w_pre,
        })
    }

    pub fn ih_dims(&self) -> &GradedSpace {
        &self.plain.quot.dims
    }

    pub fn bv_dims(&self) -> &GradedSpace {
        &self.bv.quot.dims
    }

    /// Piecewise polynomial representative of a plain quotient class.
    pub fn representative(&self, degree: i64, class: &[Q]) -> PiecewisePoly {
        let sub = self.plain.quot.lift(degree, class, self.plain.dim(degree));
        let host_vec = self.plain.bases[&degree].mul_vec(&sub);
        self.host_to_poly(degree, &host_vec)
    }

    /// Piecewise polynomial representative of a boundary-vanishing class.
    pub fn representative_bv(&self, degree: i64, class: &[Q]) -> PiecewisePoly {
        let sub = self.bv.quot.lift(degree, class, self.bv.dim(degree));
        let host_vec = self.bv.bases[&degree].mul_vec(&sub);
        self.host_to_poly(degree, &host_vec)
    }

    fn host_to_poly(&self, degree: i64, host_vec: &[Q]) -> PiecewisePoly {
        let source = &self.map.source;
        let n = source.ambient_dim();
        let polys: Vec<Poly> = source
            .max_cones()
            .iter()
            .map(|&mc| {
                let comp = self.host.component(&self.structure, degree, host_vec, mc);
                let stalk = self.structure.stalk(mc);
                let basis = stalk.basis(degree);
                let span_forms: Vec<Vec<Q>> = (0..stalk.vars)
                    .map(|j| self.structure.span_coordinate(mc, j).to_vec())
                    .collect();
                let mut p = Poly::zero(n);
                for ((_, e), c) in basis.iter().zip(comp) {
                    if c.is_zero() {
                        continue;
                    }
                    let mono = Poly::monomial(stalk.vars, e, c);
                    p = p.add(&mono.substitute_linear(&span_forms));
                }
                p
            })
            .collect();
        PiecewisePoly { polys }
    }

    /// Pairing of a boundary-vanishing class with a plain class of
    /// complementary degree.
    pub fn pair(
        &self,
        bv_degree: i64,
        bv_class: &[Q],
        plain_degree: i64,
        plain_class: &[Q],
    ) -> Result<Q, PairingError> {
        let n2 = 2 * self.base.ambient_dim() as i64;
        if bv_degree + plain_degree != n2 {
            return Err(PairingError::Internal(
                "pairing away from complementary degrees".into(),
            ));
        }
        let a = self.representative_bv(bv_degree, bv_class);
        let b = self.representative(plain_degree, plain_class);
        self.eval.evaluate_scalar(&a.mul(&b))
    }

    /// Full pairing block: rows index the boundary-vanishing classes in
    /// degree `2n - d`, columns the plain classes in degree `d`.
    pub fn pairing_block(&self, d: i64) -> Result<Mat, PairingError> {
        let n2 = 2 * self.base.ambient_dim() as i64;
        let rows = self.bv.quot.dims.dim(n2 - d);
        let cols = self.plain.quot.dims.dim(d);
        let mut m = Mat::zeros(rows, cols);
        if rows == 0 || cols == 0 {
            return Ok(m);
        }
        let pairs: Vec<(usize, usize)> = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .collect();
        let vals = crate::par::map_slice(&pairs, |&(r, c)| {
            let mut a = vec![Q::zero(); rows];
            a[r] = num::One::one();
            let mut b = vec![Q::zero(); cols];
            b[c] = num::One::one();
            self.pair(n2 - d, &a, d, &b)
        });
        for ((r, c), v) in pairs.into_iter().zip(vals) {
            m.set(r, c, v?);
        }
        Ok(m)
    }

    pub fn j_bar(&self, d: i64) -> Option<&Mat> {
        self.j_bar.get(&d)
    }

    fn restricted_action(
        &self,
        which: &SubQuotient,
        f: &PiecewiseLinear,
    ) -> Result<GradedMap, PairingError> {
        let pulled = f.pullback(&self.map);
        let host_op = pl_action(&self.structure, &self.host, &pulled)?;
        let mut sub_op = GradedMap::new(2);
        let mut d = 0;
        while d + 2 <= self.cap {
            let src = &which.bases[&d];
            let dst = &which.bases[&(d + 2)];
            let block = host_op
                .block(d)
                .cloned()
                .unwrap_or_else(|| Mat::zeros(self.host.dim(d + 2), self.host.dim(d)));
            let image = block.mul(src);
            let sol = dst
                .solve(&image)
                .filter(|s| &dst.mul(s) == &image)
                .ok_or_else(|| {
                    PairingError::Internal("function action leaves the extension module".into())
                })?;
            sub_op.insert_block(d, sol);
            d += 2;
        }
        Ok(which.quot.descend(&sub_op))
    }

    /// Action of a piecewise linear function of the base fan on the plain
    /// quotient classes.
    pub fn action(&self, f: &PiecewiseLinear) -> Result<GradedMap, PairingError> {
        self.restricted_action(&self.plain, f)
    }

    /// Action on the boundary-vanishing quotient classes.
    pub fn action_bv(&self, f: &PiecewiseLinear) -> Result<GradedMap, PairingError> {
        self.restricted_action(&self.bv, f)
    }

    pub fn w_dim(&self, d: i64) -> usize {
        self.w_dims.get(&d).copied().unwrap_or(0)
    }

    /// Basis of the multiplicity subspace in plain-quotient coordinates.
    pub fn w_basis(&self, d: i64) -> Option<&Mat> {
        self.w_plain.get(&d)
    }

    /// Action of a piecewise linear function restricted to the multiplicity
    /// subspace; errors if the subspace is not preserved.
    pub fn action_on_w(&self, f: &PiecewiseLinear) -> Result<GradedMap, PairingError> {
        let full = self.action(f)?;
        let mut out = GradedMap::new(2);
        for (&d, _) in &self.w_dims {
            let wsrc = &self.w_plain[&d];
            let dst_dim = self.plain.quot.dims.dim(d + 2);
            let image = match full.block(d) {
                Some(b) => b.mul(wsrc),
                None => Mat::zeros(dst_dim, wsrc.ncols()),
            };
            let wdst = match self.w_plain.get(&(d + 2)) {
                Some(m) => m.clone(),
                None => Mat::zeros(dst_dim, 0),
            };
            let sol = wdst
                .solve(&image)
                .filter(|s| &wdst.mul(s) == &image)
                .ok_or_else(|| {
                    PairingError::Internal(
                        "function action does not preserve the multiplicity subspace".into(),
                    )
                })?;
            out.insert_block(d, sol);
        }
        Ok(out)
    }

    /// Pairing on the multiplicity subspace: rows index degree `2n - d`
    /// classes (via boundary-vanishing preimages), columns degree `d`.
    pub fn w_pairing_block(&self, d: i64) -> Result<Mat, PairingError> {
        let n2 = 2 * self.base.ambient_dim() as i64;
        let rows = self.w_dim(n2 - d);
        let cols = self.w_dim(d);
        let mut m = Mat::zeros(rows, cols);
        if rows == 0 || cols == 0 {
            return Ok(m);
        }
        let pre = &self.w_pre[&(n2 - d)];
        let wp = &self.w_plain[&d];
        for r in 0..rows {
            for c in 0..cols {
                let v = self.pair(n2 - d, &pre.col(r), d, &wp.col(c))?;
                m.set(r, c, v);
            }
        }
        Ok(m)
    }
}
