//! Exact-rational polyhedral fans: construction, face lattices, validation,
//! orientations, and the embeddings/quotients the sheaf layer works through.
//!
//! A fan is stored as a pointed fan plus an explicit lineality basis; every
//! cone implicitly contains the lineality space. All cone-level geometry is
//! done in the quotient of the ambient space by the lineality space.

mod classify;
mod combinat;
mod json;
mod piecewise;
mod subdivide;

pub use classify::{boundary_walls, classify_support, reduced_homology, SupportClass};
pub use combinat::{f_to_h, local_h_oracle, toric_g_cone, toric_h_fan};
pub use json::{fan_from_json, fan_to_json, function_from_json, subdivision_from_json, subdivision_to_json};
pub use piecewise::{check_convexity, check_relative_convexity, ConvexityReport, PiecewiseLinear, PiecewisePoly};
pub use subdivide::{
    barycentric_subdivision, complete_convex_fan, detect_local_product, detect_semismall,
    product_fan, simplicial_refinement, star_quotient, star_subdivision, subfan_in_span,
    LocalProduct, QuotientEmbedding, SemismallReport, SpanEmbedding, SubdivisionMap,
};

use crate::linalg::lp;
use crate::linalg::mat::Mat;
use crate::rat::{dot, normalize_positive, vec_is_zero, Q};
use num::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub type ConeId = usize;

#[derive(Debug, Error)]
pub enum FanError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("degenerate ray: {0}")]
    DegenerateRay(String),
    #[error("overlapping cones: {0}")]
    OverlappingCones(String),
    #[error("face closure violated: {0}")]
    NotAFace(String),
    #[error("maximal cones have mixed dimensions")]
    MixedDimension,
    #[error("ray is not in the relative interior of the cone")]
    RayNotInterior,
    #[error("fan support is not convex")]
    NotConvex,
    #[error("negative of the ray must lie in the support interior")]
    RayNotOpposite,
    #[error("source fan is not simplicial")]
    SourceNotSimplicial,
    #[error("fan must be pointed")]
    NotPointed,
    #[error("function is not piecewise linear on the fan: {0}")]
    NotPiecewiseLinear(String),
    #[error("no local product structure at the cone")]
    NoLocalProduct,
    #[error("cone is not simplicial")]
    NotSimplicial,
    #[error("subdivision support mismatch: {0}")]
    SupportMismatch(String),
    #[error("subdivision assignment mismatch: {0}")]
    AssignmentMismatch(String),
}

#[derive(Clone, Debug)]
pub struct ConeData {
    /// Sorted ray indices; empty for the minimal cone.
    pub rays: Vec<usize>,
    /// Dimension including the lineality space.
    pub dim: usize,
    /// All faces including the cone itself, sorted by id.
    pub faces: Vec<ConeId>,
    /// Codimension-one faces within the cone.
    pub facets: Vec<ConeId>,
    /// Facet normals as quotient covectors, aligned with `facets`:
    /// nonnegative on the cone, zero exactly on the matching facet.
    pub facet_normals: Vec<Vec<Q>>,
    /// Deterministic independent subset of `rays` spanning the pointed part.
    pub span_rays: Vec<usize>,
}

impl ConeData {
    pub fn is_simplicial(&self) -> bool {
        self.span_rays.len() == self.rays.len()
    }
}

#[derive(Clone, Debug)]
pub struct Fan {
    dim: usize,
    lineality: Vec<Vec<Q>>,
    rays: Vec<Vec<Q>>,
    rays_q: Vec<Vec<Q>>,
    proj: Mat,
    cones: Vec<ConeData>,
    cone_index: BTreeMap<Vec<usize>, ConeId>,
    max_cones: Vec<ConeId>,
    /// Per cone, the ids of cones containing it (sorted). `star(c)` in poset terms.
    containers: Vec<Vec<ConeId>>,
}

impl Fan {
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn lineality_dim(&self) -> usize {
        self.lineality.len()
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn lineality(&self) -> &[Vec<Q>] {
        &self.lineality
    }

    pub fn quotient_dim(&self) -> usize {
        self.dim - self.lineality.len()
    }

    pub fn rays(&self) -> &[Vec<Q>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[Q] {
        &self.rays[i]
    }

    /// Quotient coordinates of a ray (lineality projected out).
    pub fn ray_q(&self, i: usize) -> &[Q] {
        &self.rays_q[i]
    }

    pub fn project(&self, x: &[Q]) -> Vec<Q> {
        self.proj.mul_vec(x)
    }

    pub fn cone_count(&self) -> usize {
        self.cones.len()
    }

    pub fn cone(&self, id: ConeId) -> &ConeData {
        &self.cones[id]
    }

    pub fn cones(&self) -> impl Iterator<Item = (ConeId, &ConeData)> {
        self.cones.iter().enumerate()
    }

    /// The unique minimal cone.
    pub fn minimal_cone(&self) -> ConeId {
        0
    }

    pub fn max_cones(&self) -> &[ConeId] {
        &self.max_cones
    }

    pub fn cone_by_rays(&self, rays: &[usize]) -> Option<ConeId> {
        let mut key = rays.to_vec();
        key.sort_unstable();
        key.dedup();
        self.cone_index.get(&key).copied()
    }

    pub fn is_face(&self, face: ConeId, of: ConeId) -> bool {
        self.cones[of].faces.binary_search(&face).is_ok()
    }

    /// Cones containing `tau` (including itself).
    pub fn star(&self, tau: ConeId) -> &[ConeId] {
        &self.containers[tau]
    }

    /// All faces of cones containing `tau`: the closed star, sorted.
    pub fn closed_star(&self, tau: ConeId) -> Vec<ConeId> {
        let mut out = BTreeSet::new();
        for &c in self.star(tau) {
            out.extend(self.cones[c].faces.iter().copied());
        }
        out.into_iter().collect()
    }

    pub fn is_simplicial(&self) -> bool {
        self.max_cones.iter().all(|&c| self.cones[c].is_simplicial())
    }

    pub fn cones_of_dim(&self, d: usize) -> Vec<ConeId> {
        (0..self.cones.len()).filter(|&c| self.cones[c].dim == d).collect()
    }

    /// Counts of cones per dimension above the minimal cone, indexed by
    /// pointed dimension: `f[k]` = number of cones of quotient dimension `k`.
    pub fn f_vector(&self) -> Vec<usize> {
        let m = self.lineality.len();
        let mut f = vec![0usize; self.quotient_dim() + 1];
        for c in &self.cones {
            f[c.dim - m] += 1;
        }
        f
    }

    /// Sum of the stored ray representatives; lies in the relative interior.
    pub fn barycenter(&self, cone: ConeId) -> Vec<Q> {
        let mut b = vec![Q::zero(); self.dim];
        for &r in &self.cones[cone].rays {
            b = crate::rat::vec_add(&b, &self.rays[r]);
        }
        b
    }

    /// Span basis of a cone as ambient column vectors: lineality first, then
    /// the chosen independent rays.
    pub fn span_basis(&self, cone: ConeId) -> Vec<Vec<Q>> {
        let mut basis: Vec<Vec<Q>> = self.lineality.clone();
        for &r in &self.cones[cone].span_rays {
            basis.push(self.rays[r].clone());
        }
        basis
    }

    /// Solves for quotient-span coordinates of a quotient point, if it lies in
    /// the span of the cone's pointed part.
    fn span_coords_q(&self, cone: ConeId, xq: &[Q]) -> Option<Vec<Q>> {
        let data = &self.cones[cone];
        if data.span_rays.is_empty() {
            return if vec_is_zero(xq) { Some(vec![]) } else { None };
        }
        let b = Mat::from_cols(data.span_rays.iter().map(|&r| self.rays_q[r].clone()).collect());
        let c = b.solve_vec(xq)?;
        if b.mul_vec(&c) == xq.to_vec() {
            Some(c)
        } else {
            None
        }
    }

    pub fn contains_point(&self, cone: ConeId, x: &[Q]) -> bool {
        let xq = self.project(x);
        if self.span_coords_q(cone, &xq).is_none() {
            return false;
        }
        self.cones[cone]
            .facet_normals
            .iter()
            .all(|u| !dot(u, &xq).is_negative())
    }

    pub fn point_in_relint(&self, cone: ConeId, x: &[Q]) -> bool {
        let xq = self.project(x);
        if self.span_coords_q(cone, &xq).is_none() {
            return false;
        }
        self.cones[cone]
            .facet_normals
            .iter()
            .all(|u| dot(u, &xq).is_positive())
    }

    /// The unique cone whose relative interior contains `x`, if any.
    pub fn smallest_cone_containing(&self, x: &[Q]) -> Option<ConeId> {
        let xq = self.project(x);
        if vec_is_zero(&xq) {
            // Must lie in the lineality space itself.
            let lin = Mat::from_cols(self.lineality.iter().cloned().collect());
            if self.lineality.is_empty() {
                return if vec_is_zero(x) { Some(self.minimal_cone()) } else { None };
            }
            return lin.solve_vec(x).map(|_| self.minimal_cone());
        }
        for &mc in &self.max_cones {
            if !self.contains_point(mc, x) {
                continue;
            }
            // Descend to the smallest face: keep rays vanishing on all active
            // facet normals.
            let data = &self.cones[mc];
            let mut keep: BTreeSet<usize> = data.rays.iter().copied().collect();
            for (u, _) in data.facet_normals.iter().zip(&data.facets) {
                if dot(u, &xq).is_zero() {
                    keep.retain(|&r| dot(u, &self.rays_q[r]).is_zero());
                }
            }
            let key: Vec<usize> = keep.into_iter().collect();
            let id = self
                .cone_index
                .get(&key)
                .copied()
                .expect("active-facet descent must land on a face");
            debug_assert!(self.point_in_relint(id, x));
            return Some(id);
        }
        None
    }

    /// The whole cone `inner` is contained in the cone `outer`.
    pub fn cone_contains_cone(&self, outer: ConeId, inner_rays: &[usize], inner_lineality: &[Vec<Q>]) -> bool {
        inner_rays.iter().all(|&r| self.contains_point(outer, &self.rays[r].clone()))
            && inner_lineality.iter().all(|l| {
                self.contains_point(outer, l) && self.contains_point(outer, &crate::rat::vec_neg(l))
            })
    }

    /// Incidence sign between a facet and its cone, from the stored ordered
    /// bases: the sign of the determinant of (basis of `facet`, v) expressed
    /// in the basis of `cone`, where v is the first ray of `cone` off the
    /// facet span.
    pub fn incidence_sign(&self, facet: ConeId, cone: ConeId) -> i32 {
        let fd = &self.cones[facet];
        let cd = &self.cones[cone];
        debug_assert!(cd.facets.contains(&facet));
        let b_cone = Mat::from_cols(cd.span_rays.iter().map(|&r| self.rays_q[r].clone()).collect());
        let mut cols: Vec<Vec<Q>> = Vec::new();
        for &r in &fd.span_rays {
            cols.push(self.rays_q[r].clone());
        }
        let v = cd
            .rays
            .iter()
            .copied()
            .find(|&r| {
                // first ray of the cone not in the facet span
                let fb = Mat::from_cols(fd.span_rays.iter().map(|&s| self.rays_q[s].clone()).collect());
                if fd.span_rays.is_empty() {
                    return !vec_is_zero(&self.rays_q[r]);
                }
                match fb.solve_vec(&self.rays_q[r]) {
                    Some(c) => fb.mul_vec(&c) != self.rays_q[r],
                    None => true,
                }
            })
            .expect("cone has a ray off each facet");
        cols.push(self.rays_q[v].clone());
        let rhs = Mat::from_cols(cols);
        let x = b_cone.solve(&rhs).expect("facet basis lies in the cone span");
        let d = x.det();
        debug_assert!(!d.is_zero());
        if d.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Remaps every maximal cone through `f` and rebuilds. Used by tests for
    /// rescaling-invariance; geometry must be preserved by `f`.
    pub fn rebuild_with_rays(&self, rays: Vec<Vec<Q>>) -> Result<Fan, FanError> {
        let max: Vec<Vec<usize>> = self.max_cones.iter().map(|&c| self.cones[c].rays.clone()).collect();
        build_fan(self.dim, rays, max, self.lineality.clone())
    }
}

/// Greedy deterministic choice of an independent subset, by index order.
fn independent_subset(vectors: &[(usize, &[Q])]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<Q>> = Vec::new();
    for &(idx, v) in vectors {
        if vec_is_zero(v) {
            continue;
        }
        let mut m = basis.clone();
        m.push(v.to_vec());
        if Mat::from_rows(m).rank() > basis.len() {
            basis.push(v.to_vec());
            chosen.push(idx);
        }
    }
    chosen
}

struct FaceInfo {
    dim_q: usize,
    span_rays: Vec<usize>,
    /// (facet ray set, facet normal in quotient covector form)
    facets: Vec<(Vec<usize>, Vec<Q>)>,
}

/// Enumerates the face structure of the cone on the given (quotient) rays.
/// Normals are returned as canonical quotient covectors (zero on a chosen
/// complement of the span).
fn cone_face_info(rays_q: &[Vec<Q>], ray_set: &[usize], nq: usize) -> Result<FaceInfo, FanError> {
    let vecs: Vec<(usize, &[Q])> = ray_set.iter().map(|&r| (r, rays_q[r].as_slice())).collect();
    let span_rays = independent_subset(&vecs);
    let d = span_rays.len();
    if d == 0 {
        return Ok(FaceInfo {
            dim_q: 0,
            span_rays,
            facets: Vec::new(),
        });
    }
    // Span coordinates: complete the span basis with standard vectors to a
    // basis of the quotient space, deterministically.
    let mut ext_cols: Vec<Vec<Q>> = span_rays.iter().map(|&r| rays_q[r].clone()).collect();
    let mut rank = d;
    for j in 0..nq {
        if rank == nq {
            break;
        }
        let mut e = vec![Q::zero(); nq];
        e[j] = num::One::one();
        let mut m = ext_cols.clone();
        m.push(e.clone());
        if Mat::from_cols(m.clone()).rank() > rank {
            ext_cols.push(e);
            rank += 1;
        }
    }
    let ext = Mat::from_cols(ext_cols);
    let ext_inv = ext.inverse().expect("completed basis is invertible");
    // Span coordinates of the cone's rays (first d coordinates; the rest are
    // zero for points in the span).
    let coords: BTreeMap<usize, Vec<Q>> = ray_set
        .iter()
        .map(|&r| {
            let c = ext_inv.mul_vec(&rays_q[r]);
            debug_assert!(c[d..].iter().all(|x| x.is_zero()), "ray off its own cone span");
            (r, c[..d].to_vec())
        })
        .collect();
    // Facet normals from (d-1)-subsets of the rays.
    let mut facets: BTreeMap<Vec<usize>, Vec<Q>> = BTreeMap::new();
    let subsets = combinations(ray_set, d.saturating_sub(1));
    for t in subsets {
        let m = Mat::from_rows(t.iter().map(|&r| coords[&r].clone()).collect());
        if d > 1 && m.rank() != d - 1 {
            continue;
        }
        let ker = if d == 1 {
            Mat::identity(1)
        } else {
            m.kernel_basis()
        };
        if ker.ncols() != 1 {
            continue;
        }
        let mut u = ker.col(0);
        let mut pos = false;
        let mut neg = false;
        for &r in ray_set {
            let v = dot(&u, &coords[&r]);
            if v.is_positive() {
                pos = true;
            } else if v.is_negative() {
                neg = true;
            }
        }
        if pos && neg {
            continue;
        }
        if neg {
            u = crate::rat::vec_neg(&u);
        }
        if !pos && !neg {
            continue; // vanishes on every ray: not a supporting normal
        }
        let face: Vec<usize> = ray_set
            .iter()
            .copied()
            .filter(|&r| dot(&u, &coords[&r]).is_zero())
            .collect();
        // Lift the span-coordinate normal to a quotient covector through the
        // completed basis (zero on the complement part).
        let mut u_ext = vec![Q::zero(); nq];
        u_ext[..d].clone_from_slice(&u);
        let uq = ext_inv.transpose().mul_vec(&u_ext);
        facets.entry(face).or_insert_with(|| normalize_positive(&uq));
    }
    Ok(FaceInfo {
        dim_q: d,
        span_rays,
        facets: facets.into_iter().collect(),
    })
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let n = items.len();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Builds a fan from ray representatives, maximal cones (as ray index sets),
/// and a lineality basis. The full face lattice is derived; disjointness of
/// relative interiors is certified exactly.
pub fn build_fan(
    dim: usize,
    rays: Vec<Vec<Q>>,
    max_cones: Vec<Vec<usize>>,
    lineality: Vec<Vec<Q>>,
) -> Result<Fan, FanError> {
    for r in &rays {
        if r.len() != dim {
            return Err(FanError::Input(format!(
                "ray has {} coordinates, ambient dimension is {dim}",
                r.len()
            )));
        }
    }
    for l in &lineality {
        if l.len() != dim {
            return Err(FanError::Input("lineality vector has wrong length".into()));
        }
    }
    // Canonical lineality basis.
    let lin_mat = Mat::from_rows(lineality.clone());
    let (lin_rref, lin_pivots) = if lineality.is_empty() {
        (Mat::zeros(0, dim), vec![])
    } else {
        lin_mat.rref()
    };
    let m = lin_pivots.len();
    let lineality: Vec<Vec<Q>> = (0..m).map(|i| lin_rref.row(i).to_vec()).collect();
    if m > dim {
        return Err(FanError::Input("lineality rank exceeds ambient dimension".into()));
    }
    // Quotient projection: reduce by the lineality rref, keep non-pivot coords.
    let nq = dim - m;
    let pivot_set: BTreeSet<usize> = lin_pivots.iter().copied().collect();
    let free_coords: Vec<usize> = (0..dim).filter(|c| !pivot_set.contains(c)).collect();
    let mut proj = Mat::zeros(nq, dim);
    for (row, &fc) in free_coords.iter().enumerate() {
        proj.set(row, fc, num::One::one());
        // subtract the lineality combination that clears the pivot coords:
        // x - sum_i x_{p_i} * lin_i  has zero pivot coordinates; its free
        // coordinates are x_{fc} - sum_i x_{p_i} lin_i[fc].
        for (i, &p) in lin_pivots.iter().enumerate() {
            let v = -lineality[i][fc].clone();
            proj.set(row, p, v);
        }
    }
    // Rays: nonzero in the quotient, pairwise distinct up to positive scaling.
    let mut rays_q = Vec::with_capacity(rays.len());
    let mut seen: BTreeMap<Vec<Q>, usize> = BTreeMap::new();
    for (i, r) in rays.iter().enumerate() {
        let rq = proj.mul_vec(r);
        if vec_is_zero(&rq) {
            return Err(FanError::DegenerateRay(format!(
                "ray {i} lies in the lineality space"
            )));
        }
        let norm = normalize_positive(&rq);
        if let Some(&j) = seen.get(&norm) {
            return Err(FanError::DegenerateRay(format!(
                "rays {j} and {i} agree up to positive scaling"
            )));
        }
        seen.insert(norm, i);
        rays_q.push(rq);
    }
    // Normalize the input cone list.
    let mut max_sets: Vec<Vec<usize>> = Vec::new();
    for (ci, cone) in max_cones.iter().enumerate() {
        let mut s = cone.clone();
        for &r in &s {
            if r >= rays.len() {
                return Err(FanError::Input(format!("cone {ci} references missing ray {r}")));
            }
        }
        s.sort_unstable();
        s.dedup();
        if !max_sets.contains(&s) {
            max_sets.push(s);
        }
    }
    if max_sets.is_empty() {
        max_sets.push(Vec::new());
    }
    // Extremality of each input cone's generators.
    for s in &max_sets {
        for (k, &r) in s.iter().enumerate() {
            let others: Vec<Vec<Q>> = s
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &o)| rays_q[o].clone())
                .collect();
            if lp::in_cone(&others, &[], &rays_q[r]) {
                return Err(FanError::DegenerateRay(format!(
                    "ray {r} is not extreme in cone {:?}",
                    s
                )));
            }
        }
    }
    // Enumerate faces, memoized by ray set.
    let mut cache: BTreeMap<Vec<usize>, FaceInfo> = BTreeMap::new();
    let mut all_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stack: Vec<Vec<usize>> = max_sets.clone();
    while let Some(s) = stack.pop() {
        if all_sets.contains(&s) {
            continue;
        }
        let info = cone_face_info(&rays_q, &s, nq)?;
        for (facet, _) in &info.facets {
            if !all_sets.contains(facet) {
                stack.push(facet.clone());
            }
        }
        all_sets.insert(s.clone());
        cache.insert(s, info);
    }
    all_sets.insert(Vec::new());
    cache.entry(Vec::new()).or_insert(FaceInfo {
        dim_q: 0,
        span_rays: vec![],
        facets: vec![],
    });
    // Assign ids sorted by (dimension, ray set).
    let mut ordered: Vec<Vec<usize>> = all_sets.into_iter().collect();
    ordered.sort_by_key(|s| (cache[s].dim_q, s.clone()));
    let cone_index: BTreeMap<Vec<usize>, ConeId> =
        ordered.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    // Full face lists by closure over facets.
    let mut faces_of: Vec<BTreeSet<ConeId>> = vec![BTreeSet::new(); ordered.len()];
    for (id, s) in ordered.iter().enumerate() {
        let mut acc: BTreeSet<ConeId> = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(c) = stack.pop() {
            if !acc.insert(c) {
                continue;
            }
            for (facet, _) in &cache[&ordered[c]].facets {
                stack.push(cone_index[facet]);
            }
        }
        acc.insert(cone_index[&Vec::new()]);
        faces_of[id] = acc;
        let _ = s;
    }
    let mut cones: Vec<ConeData> = Vec::with_capacity(ordered.len());
    for (id, s) in ordered.iter().enumerate() {
        let info = &cache[s];
        let mut facets: Vec<ConeId> = Vec::new();
        let mut normals: Vec<Vec<Q>> = Vec::new();
        for (fs, u) in &info.facets {
            facets.push(cone_index[fs]);
            normals.push(u.clone());
        }
        cones.push(ConeData {
            rays: s.clone(),
            dim: info.dim_q + m,
            faces: faces_of[id].iter().copied().collect(),
            facets,
            facet_normals: normals,
            span_rays: info.span_rays.clone(),
        });
    }
    let mut containers: Vec<Vec<ConeId>> = vec![Vec::new(); cones.len()];
    for (id, c) in cones.iter().enumerate() {
        for &f in &c.faces {
            containers[f].push(id);
        }
    }
    let max_ids: Vec<ConeId> = (0..cones.len()).filter(|&c| containers[c].len() == 1).collect();
    let fan = Fan {
        dim,
        lineality,
        rays,
        rays_q,
        proj,
        cones,
        cone_index,
        max_cones: max_ids,
        containers,
    };
    validate_disjoint_interiors(&fan, &max_sets)?;
    Ok(fan)
}

/// Certifies that all pairs of input cones intersect in a common face, via
/// supporting-normal descent with an exact separation LP as fallback.
fn validate_disjoint_interiors(fan: &Fan, max_sets: &[Vec<usize>]) -> Result<(), FanError> {
    let ids: Vec<ConeId> = max_sets
        .iter()
        .map(|s| fan.cone_index[s])
        .collect();
    let pairs: Vec<(ConeId, ConeId)> = {
        let mut p = Vec::new();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                p.push((ids[i], ids[j]));
            }
        }
        p
    };
    let results = crate::par::map_slice(&pairs, |&(a, b)| check_separated(fan, a, b));
    for r in results {
        r?;
    }
    Ok(())
}

fn check_separated(fan: &Fan, a: ConeId, b: ConeId) -> Result<(), FanError> {
    if a == b {
        return Ok(());
    }
    let ra: BTreeSet<usize> = fan.cones[a].rays.iter().copied().collect();
    let rb: BTreeSet<usize> = fan.cones[b].rays.iter().copied().collect();
    if ra.is_subset(&rb) {
        return if fan.is_face(a, b) {
            Ok(())
        } else {
            Err(FanError::NotAFace(format!(
                "cone {:?} lies in {:?} without being a face",
                fan.cones[a].rays, fan.cones[b].rays
            )))
        };
    }
    if rb.is_subset(&ra) {
        return check_separated(fan, b, a);
    }
    let common: Vec<usize> = ra.intersection(&rb).copied().collect();
    // Fast path: an existing facet normal of either cone that weakly
    // separates lets us descend to the zero faces.
    for (first, second) in [(a, b), (b, a)] {
        let fd = &fan.cones[first];
        for u in &fd.facet_normals {
            let ok_second = fan.cones[second]
                .rays
                .iter()
                .all(|&r| !dot(u, &fan.rays_q[r]).is_positive());
            if !ok_second {
                continue;
            }
            let fa: Vec<usize> = fan.cones[first]
                .rays
                .iter()
                .copied()
                .filter(|&r| dot(u, &fan.rays_q[r]).is_zero())
                .collect();
            let fb: Vec<usize> = fan.cones[second]
                .rays
                .iter()
                .copied()
                .filter(|&r| dot(u, &fan.rays_q[r]).is_zero())
                .collect();
            let ia = fan.cone_by_rays(&fa);
            let ib = fan.cone_by_rays(&fb);
            if let (Some(ia), Some(ib)) = (ia, ib) {
                if fan.is_face(ia, first) && fan.is_face(ib, second) {
                    return check_separated(fan, ia, ib);
                }
            }
        }
    }
    // Exact decision: a functional vanishing exactly on the common rays,
    // strictly positive on the rest of `a`, strictly negative on the rest
    // of `b`. Existence certifies that the intersection is the common face.
    let zero: Vec<Vec<Q>> = common.iter().map(|&r| fan.rays_q[r].clone()).collect();
    let pos: Vec<Vec<Q>> = fan.cones[a]
        .rays
        .iter()
        .filter(|r| !common.contains(r))
        .map(|&r| fan.rays_q[r].clone())
        .collect();
    let neg: Vec<Vec<Q>> = fan.cones[b]
        .rays
        .iter()
        .filter(|r| !common.contains(r))
        .map(|&r| fan.rays_q[r].clone())
        .collect();
    match lp::separating_functional(&zero, &pos, &neg) {
        Some(_) => {
            let cid = fan.cone_by_rays(&common);
            match cid {
                Some(c) if fan.is_face(c, a) && fan.is_face(c, b) => Ok(()),
                _ => Err(FanError::NotAFace(format!(
                    "common rays {:?} of cones {:?} and {:?} do not form a common face",
                    common, fan.cones[a].rays, fan.cones[b].rays
                ))),
            }
        }
        None => Err(FanError::OverlappingCones(format!(
            "cones {:?} and {:?} share interior points",
            fan.cones[a].rays, fan.cones[b].rays
        ))),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rat::{q, qvec};

    pub(crate) fn line_fan() -> Fan {
        build_fan(
            1,
            vec![qvec(&[1]), qvec(&[-1])],
            vec![vec![0], vec![1]],
            vec![],
        )
        .unwrap()
    }

    pub(crate) fn taxicab(f: &Fan) -> PiecewiseLinear {
        PiecewiseLinear::from_ray_values(f, &vec![q(1); f.rays().len()]).unwrap()
    }

    pub(crate) fn quadrant_fan() -> Fan {
        // Four quadrants of the plane.
        build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[-1, 0]), qvec(&[0, -1])],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn line_fan_structure() {
        let f = line_fan();
        assert_eq!(f.cone_count(), 3);
        assert_eq!(f.max_cones().len(), 2);
        assert_eq!(f.cone(f.minimal_cone()).dim, 0);
    }

    #[test]
    fn quadrant_fan_structure() {
        let f = quadrant_fan();
        assert_eq!(f.f_vector(), vec![1, 4, 4]);
        assert_eq!(f.max_cones().len(), 4);
        // e1 + e2 sits in the interior of the first quadrant
        let c = f.smallest_cone_containing(&qvec(&[1, 1])).unwrap();
        assert_eq!(f.cone(c).rays, vec![0, 1]);
        let r = f.smallest_cone_containing(&qvec(&[2, 0])).unwrap();
        assert_eq!(f.cone(r).rays, vec![0]);
        assert_eq!(f.smallest_cone_containing(&qvec(&[0, 0])), Some(0));
    }

    #[test]
    fn overlapping_cones_detected() {
        // cone(e1, e1+e2) and cone(e2, e1+e2) fit together; cone(e1, e2)
        // swallows both.
        let err = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])],
            vec![vec![0, 2], vec![1, 2], vec![0, 1]],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, FanError::OverlappingCones(_)), "{err:?}");
    }

    #[test]
    fn degenerate_rays_detected() {
        let err = build_fan(2, vec![qvec(&[0, 0])], vec![vec![0]], vec![]).unwrap_err();
        assert!(matches!(err, FanError::DegenerateRay(_)));
        let err = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[2, 0])],
            vec![vec![0], vec![1]],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, FanError::DegenerateRay(_)));
        // non-extreme generator
        let err = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])],
            vec![vec![0, 1, 2]],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, FanError::DegenerateRay(_)));
    }

    #[test]
    fn cone_over_square_faces() {
        // Nonsimplicial: cone over the unit square at height 1.
        let f = build_fan(
            3,
            vec![
                qvec(&[1, 0, 1]),
                qvec(&[0, 1, 1]),
                qvec(&[-1, 0, 1]),
                qvec(&[0, -1, 1]),
            ],
            vec![vec![0, 1, 2, 3]],
            vec![],
        )
        .unwrap();
        assert_eq!(f.f_vector(), vec![1, 4, 4, 1]);
        let top = *f.max_cones().first().unwrap();
        assert!(!f.cone(top).is_simplicial());
        assert_eq!(f.cone(top).facets.len(), 4);
    }

    #[test]
    fn lineality_fan() {
        // Two half-planes x >= 0 and x <= 0 with lineality the y-axis.
        let f = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[-1, 0])],
            vec![vec![0], vec![1]],
            vec![qvec(&[0, 1])],
        )
        .unwrap();
        assert_eq!(f.lineality_dim(), 1);
        assert_eq!(f.quotient_dim(), 1);
        assert_eq!(f.cone(f.minimal_cone()).dim, 1);
        assert_eq!(f.cone_count(), 3);
        // the whole y-axis lies in the minimal cone
        assert_eq!(f.smallest_cone_containing(&qvec(&[0, -5])), Some(0));
        assert!(f.contains_point(f.max_cones()[0], &qvec(&[1, 7])) || f.contains_point(f.max_cones()[1], &qvec(&[1, 7])));
    }

    #[test]
    fn incidence_signs_square_to_zero() {
        for fan in [line_fan(), quadrant_fan()] {
            // d o d = 0 for the constant-sheaf cellular complex.
            let n = fan.quotient_dim();
            for codim in 0..n.saturating_sub(1) {
                let top = fan.cones_of_dim(n - codim);
                let mid = fan.cones_of_dim(n - codim - 1);
                let low = fan.cones_of_dim(n - codim - 2);
                for &s in &top {
                    for &l in &low {
                        let mut total = 0i32;
                        for &m in &mid {
                            if fan.cone(s).facets.contains(&m) && fan.cone(m).facets.contains(&l) {
                                total += fan.incidence_sign(m, s) * fan.incidence_sign(l, m);
                            }
                        }
                        assert_eq!(total, 0, "d^2 != 0 between cones {s} and {l}");
                    }
                }
            }
        }
    }

    #[test]
    fn rescaling_rays_preserves_structure() {
        let f = quadrant_fan();
        let mut rays = f.rays().to_vec();
        rays[0] = crate::rat::vec_scale(&rays[0], &q(7));
        rays[2] = crate::rat::vec_scale(&rays[2], &crate::rat::qr(1, 3));
        let g = f.rebuild_with_rays(rays).unwrap();
        assert_eq!(f.f_vector(), g.f_vector());
        assert_eq!(f.max_cones().len(), g.max_cones().len());
        for (id, c) in f.cones() {
            assert_eq!(c.rays, g.cone(id).rays);
            assert_eq!(c.faces, g.cone(id).faces);
        }
    }
}
