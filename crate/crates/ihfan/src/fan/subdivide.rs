//! Subdivisions and the fan surgeries built from them: star and barycentric
//! subdivision, completion of convex fans, products, local product structure,
//! semi-smallness, star quotients and span re-embeddings.

use super::classify::{boundary_walls, classify_support, SupportClass};
use super::{build_fan, ConeId, Fan, FanError};
use crate::linalg::lp;
use crate::linalg::mat::Mat;
use crate::rat::{normalize_positive, vec_is_zero, Q};
use num::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// A subdivision of fans with the same support: each source cone is assigned
/// the smallest target cone containing it.
#[derive(Clone, Debug)]
pub struct SubdivisionMap {
    pub source: Arc<Fan>,
    pub target: Arc<Fan>,
    pub assignment: Vec<ConeId>,
}

impl SubdivisionMap {
    /// Computes the assignment and certifies that the supports agree.
    pub fn new(source: Arc<Fan>, target: Arc<Fan>) -> Result<Self, FanError> {
        if source.ambient_dim() != target.ambient_dim() {
            return Err(FanError::Input("subdivision fans live in different spaces".into()));
        }
        let assignment_res = crate::par::map_range(source.cone_count(), |c| {
            let b = source.barycenter(c);
            let tgt = target.smallest_cone_containing(&b).ok_or_else(|| {
                FanError::SupportMismatch(format!(
                    "source cone {:?} leaves the target support",
                    source.cone(c).rays
                ))
            })?;
            // The barycenter lands in the target cone; the whole cone must too.
            for &r in &source.cone(c).rays {
                if !target.contains_point(tgt, source.ray(r)) {
                    return Err(FanError::SupportMismatch(format!(
                        "source cone {:?} is not contained in one target cone",
                        source.cone(c).rays
                    )));
                }
            }
            for l in source.lineality() {
                if !target.contains_point(tgt, l)
                    || !target.contains_point(tgt, &crate::rat::vec_neg(l))
                {
                    return Err(FanError::SupportMismatch(
                        "source lineality leaves the target minimal cone".into(),
                    ));
                }
            }
            Ok(tgt)
        });
        let mut assignment = Vec::with_capacity(source.cone_count());
        for a in assignment_res {
            assignment.push(a?);
        }
        let map = SubdivisionMap {
            source,
            target,
            assignment,
        };
        map.validate()?;
        Ok(map)
    }

    /// Cross-checks a stored assignment against the recomputed one.
    pub fn with_assignment(
        source: Arc<Fan>,
        target: Arc<Fan>,
        assignment: Vec<ConeId>,
    ) -> Result<Self, FanError> {
        let map = Self::new(source, target)?;
        if map.assignment != assignment {
            return Err(FanError::AssignmentMismatch(
                "stored assignment disagrees with the recomputed one".into(),
            ));
        }
        Ok(map)
    }

    fn validate(&self) -> Result<(), FanError> {
        // Order preservation.
        for (c, data) in self.source.cones() {
            for &f in &data.faces {
                if !self.target.is_face(self.assignment[f], self.assignment[c]) {
                    return Err(FanError::AssignmentMismatch(
                        "assignment is not order preserving".into(),
                    ));
                }
            }
        }
        // The minimal cone maps to the minimal cone.
        if self.assignment[self.source.minimal_cone()] != self.target.minimal_cone() {
            return Err(FanError::SupportMismatch(
                "minimal cone does not map to the minimal cone".into(),
            ));
        }
        // Every target cone is exactly covered by its fiber.
        for &sigma in self.target.max_cones() {
            self.check_fiber_covers(sigma)?;
        }
        Ok(())
    }

    /// The fiber over a target cone must be a fan subdividing it: full-
    /// dimensional tops, interior walls shared by two, boundary walls on the
    /// target boundary.
    fn check_fiber_covers(&self, sigma: ConeId) -> Result<(), FanError> {
        let d = self.target.cone(sigma).dim;
        let fiber = self.fiber(sigma);
        let tops: Vec<ConeId> = fiber
            .iter()
            .copied()
            .filter(|&c| self.source.cone(c).dim == d)
            .collect();
        if tops.is_empty() {
            return Err(FanError::SupportMismatch(format!(
                "target cone {:?} has no full-dimensional fiber cone",
                self.target.cone(sigma).rays
            )));
        }
        let fiber_set: BTreeSet<ConeId> = fiber.iter().copied().collect();
        for &w in &fiber {
            if self.source.cone(w).dim != d - 1 {
                continue;
            }
            let above = self
                .source
                .star(w)
                .iter()
                .filter(|&&c| fiber_set.contains(&c) && self.source.cone(c).dim == d)
                .count();
            if above >= 2 {
                continue;
            }
            // Must lie on the boundary of the target cone: inside some facet.
            let on_boundary = self.target.cone(sigma).facets.iter().any(|&f| {
                self.source
                    .cone(w)
                    .rays
                    .iter()
                    .all(|&r| self.target.contains_point(f, self.source.ray(r)))
            });
            if !on_boundary {
                return Err(FanError::SupportMismatch(format!(
                    "fiber wall {:?} of target cone {:?} is uncovered",
                    self.source.cone(w).rays,
                    self.target.cone(sigma).rays
                )));
            }
        }
        Ok(())
    }

    /// Source cones mapping into the closed target cone `[sigma]`.
    pub fn fiber(&self, sigma: ConeId) -> Vec<ConeId> {
        (0..self.source.cone_count())
            .filter(|&c| self.target.is_face(self.assignment[c], sigma))
            .collect()
    }

    /// Source cones mapping exactly onto `sigma`.
    pub fn cones_over(&self, sigma: ConeId) -> Vec<ConeId> {
        (0..self.source.cone_count())
            .filter(|&c| self.assignment[c] == sigma)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.source.cone_count() == self.target.cone_count()
            && self
                .assignment
                .iter()
                .enumerate()
                .all(|(c, &t)| self.source.cone(c).rays == self.target.cone(t).rays)
    }

    pub fn identity(fan: Arc<Fan>) -> Self {
        let count = fan.cone_count();
        SubdivisionMap {
            source: fan.clone(),
            target: fan,
            assignment: (0..count).collect(),
        }
    }
}

/// Star subdivision of `fan` at `cone`, inserting `new_ray` from its relative
/// interior.
pub fn star_subdivision(
    fan: &Fan,
    cone: ConeId,
    new_ray: &[Q],
) -> Result<(Arc<Fan>, SubdivisionMap), FanError> {
    if cone == fan.minimal_cone() || !fan.point_in_relint(cone, new_ray) {
        return Err(FanError::RayNotInterior);
    }
    let target = Arc::new(fan.clone());
    let pointed_dim = fan.cone(cone).dim - fan.lineality_dim();
    if pointed_dim == 1 {
        // The interior of a ray is the ray; nothing to subdivide.
        let map = SubdivisionMap::new(target.clone(), target.clone())?;
        return Ok((target, map));
    }
    let mut rays = fan.rays().to_vec();
    let new_idx = rays.len();
    rays.push(new_ray.to_vec());
    let mut max_sets: Vec<Vec<usize>> = Vec::new();
    for &mc in fan.max_cones() {
        if !fan.is_face(cone, mc) {
            max_sets.push(fan.cone(mc).rays.clone());
            continue;
        }
        for &facet in &fan.cone(mc).facets {
            if fan.is_face(cone, facet) {
                continue;
            }
            let mut s = fan.cone(facet).rays.clone();
            s.push(new_idx);
            max_sets.push(s);
        }
    }
    let refined = Arc::new(build_fan(
        fan.ambient_dim(),
        rays,
        max_sets,
        fan.lineality().to_vec(),
    )?);
    let map = SubdivisionMap::new(refined.clone(), target)?;
    Ok((refined, map))
}

/// Barycentric subdivision: star subdivisions at the barycenters of the
/// original cones, in decreasing dimension. Returns the refined fan, the
/// composite map, and the single-step maps in order.
pub fn barycentric_subdivision(
    fan: &Fan,
) -> Result<(Arc<Fan>, SubdivisionMap, Vec<SubdivisionMap>), FanError> {
    if !fan.is_pointed() {
        return Err(FanError::NotPointed);
    }
    subdivide_cones_by_dim(fan, |_fan, _id| true)
}

/// Star subdivisions at the nonsimplicial cones only, in decreasing
/// dimension; cheaper than barycentric and still yields a simplicial fan.
pub fn simplicial_refinement(fan: &Fan) -> Result<Arc<Fan>, FanError> {
    if fan.is_simplicial() {
        return Ok(Arc::new(fan.clone()));
    }
    let (refined, _, _) = subdivide_cones_by_dim(fan, |f, id| !f.cone(id).is_simplicial())?;
    debug_assert!(refined.is_simplicial());
    Ok(refined)
}

fn subdivide_cones_by_dim(
    fan: &Fan,
    select: impl Fn(&Fan, ConeId) -> bool,
) -> Result<(Arc<Fan>, SubdivisionMap, Vec<SubdivisionMap>), FanError> {
    let original = Arc::new(fan.clone());
    let m = fan.lineality_dim();
    let mut current: Arc<Fan> = original.clone();
    let mut steps: Vec<SubdivisionMap> = Vec::new();
    let top = fan.quotient_dim();
    for d in (2..=top).rev() {
        // Original cones of pointed dimension d, tracked by ray set (their
        // rays keep their indices through every step).
        let mut targets: Vec<(Vec<usize>, Vec<Q>)> = fan
            .cones()
            .filter(|(id, c)| c.dim == d + m && select(fan, *id))
            .map(|(id, c)| (c.rays.clone(), fan.barycenter(id)))
            .collect();
        targets.sort();
        for (rays, bary) in targets {
            let id = current
                .cone_by_rays(&rays)
                .expect("original cone survives until its own dimension is processed");
            let (next, step) = star_subdivision(&current, id, &bary)?;
            steps.push(step);
            current = next;
        }
    }
    let map = SubdivisionMap::new(current.clone(), original)?;
    Ok((current, map, steps))
}

/// Completes a convex fan by coning its boundary over a ray whose negative
/// points into the support interior.
pub fn complete_convex_fan(fan: &Fan, ray: &[Q]) -> Result<Arc<Fan>, FanError> {
    match classify_support(fan)? {
        SupportClass::Convex => {}
        _ => return Err(FanError::NotConvex),
    }
    let neg: Vec<Q> = crate::rat::vec_neg(ray);
    // Interior test: strictly inside every boundary-wall halfspace and inside
    // some full-dimensional cone.
    let walls = boundary_walls(fan);
    for &w in &walls {
        let owner = fan
            .star(w)
            .iter()
            .copied()
            .find(|&c| fan.cone(c).dim == fan.ambient_dim())
            .expect("boundary wall has a full-dimensional cone");
        let pos = fan.cone(owner).facets.iter().position(|&f| f == w).unwrap();
        let u = &fan.cone(owner).facet_normals[pos];
        if !crate::rat::dot(u, &fan.project(&neg)).is_positive() {
            return Err(FanError::RayNotOpposite);
        }
    }
    if fan.smallest_cone_containing(&neg).is_none() {
        return Err(FanError::RayNotOpposite);
    }
    let mut rays = fan.rays().to_vec();
    let new_idx = rays.len();
    rays.push(ray.to_vec());
    let mut max_sets: Vec<Vec<usize>> = fan
        .max_cones()
        .iter()
        .map(|&c| fan.cone(c).rays.clone())
        .collect();
    for &w in &walls {
        let mut s = fan.cone(w).rays.clone();
        s.push(new_idx);
        max_sets.push(s);
    }
    let completed = build_fan(fan.ambient_dim(), rays, max_sets, fan.lineality().to_vec())?;
    debug_assert_eq!(classify_support(&completed)?, SupportClass::Complete);
    Ok(Arc::new(completed))
}

/// The product fan in the direct sum of the ambient spaces.
pub fn product_fan(a: &Fan, b: &Fan) -> Result<Fan, FanError> {
    let (na, nb) = (a.ambient_dim(), b.ambient_dim());
    let pad_a = |v: &[Q]| -> Vec<Q> {
        let mut out = v.to_vec();
        out.extend(std::iter::repeat_with(Q::zero).take(nb));
        out
    };
    let pad_b = |v: &[Q]| -> Vec<Q> {
        let mut out: Vec<Q> = std::iter::repeat_with(Q::zero).take(na).collect();
        out.extend(v.iter().cloned());
        out
    };
    let mut rays: Vec<Vec<Q>> = a.rays().iter().map(|r| pad_a(r)).collect();
    let offset = rays.len();
    rays.extend(b.rays().iter().map(|r| pad_b(r)));
    let mut lineality: Vec<Vec<Q>> = a.lineality().iter().map(|l| pad_a(l)).collect();
    lineality.extend(b.lineality().iter().map(|l| pad_b(l)));
    let mut max_sets = Vec::new();
    for &ma in a.max_cones() {
        for &mb in b.max_cones() {
            let mut s = a.cone(ma).rays.clone();
            s.extend(b.cone(mb).rays.iter().map(|&r| r + offset));
            max_sets.push(s);
        }
    }
    build_fan(na + nb, rays, max_sets, lineality)
}

#[derive(Clone, Debug)]
pub struct LocalProduct {
    pub has_structure: bool,
    /// For each cone of `star(tau)`, the complementary face realizing it as
    /// `tau + complement` (when the structure exists).
    pub complements: BTreeMap<ConeId, ConeId>,
}

/// Searches each cone of the star for a complementary face.
pub fn detect_local_product(fan: &Fan, tau: ConeId) -> LocalProduct {
    let mut complements = BTreeMap::new();
    let mut ok = true;
    let tau_span: Vec<Vec<Q>> = fan
        .cone(tau)
        .span_rays
        .iter()
        .map(|&r| fan.ray_q(r).to_vec())
        .collect();
    for &sigma in fan.star(tau) {
        let sd = &fan.cone(sigma);
        let mut found = None;
        for &cand in &sd.faces {
            let cd = &fan.cone(cand);
            if cd.dim + fan.cone(tau).dim - fan.lineality_dim() != sd.dim {
                continue;
            }
            // Independent spans.
            let mut vectors = tau_span.clone();
            vectors.extend(cd.span_rays.iter().map(|&r| fan.ray_q(r).to_vec()));
            if Mat::from_rows(vectors).rank() != sd.dim - fan.lineality_dim() {
                continue;
            }
            // tau + cand generates sigma.
            let gens: Vec<Vec<Q>> = fan
                .cone(tau)
                .rays
                .iter()
                .chain(cd.rays.iter())
                .map(|&r| fan.ray_q(r).to_vec())
                .collect();
            let covered = sd
                .rays
                .iter()
                .all(|&r| lp::in_cone(&gens, &[], fan.ray_q(r)));
            if covered {
                found = Some(cand);
                break;
            }
        }
        match found {
            Some(c) => {
                complements.insert(sigma, c);
            }
            None => ok = false,
        }
    }
    LocalProduct {
        has_structure: ok,
        complements,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SemismallReport {
    pub semi_small: bool,
    pub small: bool,
}

/// A simplicial subdivision is semi-small when no cone maps to a cone of more
/// than twice its dimension, small when the inequality is strict away from
/// the minimal cone.
pub fn detect_semismall(map: &SubdivisionMap) -> Result<SemismallReport, FanError> {
    if !map.source.is_pointed() || !map.target.is_pointed() {
        return Err(FanError::NotPointed);
    }
    if !map.source.is_simplicial() {
        return Err(FanError::SourceNotSimplicial);
    }
    let mut semi = true;
    let mut small = true;
    for (c, data) in map.source.cones() {
        let image_dim = map.target.cone(map.assignment[c]).dim;
        if image_dim > 2 * data.dim {
            semi = false;
        }
        if c != map.source.minimal_cone() && image_dim >= 2 * data.dim {
            small = false;
        }
    }
    Ok(SemismallReport {
        semi_small: semi,
        small: small && semi,
    })
}

/// A subfan re-embedded into the coordinates of its own span.
pub struct SpanEmbedding {
    pub fan: Arc<Fan>,
    /// Columns are the chosen ambient basis vectors of the span.
    pub basis: Mat,
    /// Original cone id -> embedded cone id.
    pub cone_map: BTreeMap<ConeId, ConeId>,
    /// Original ray id -> embedded ray id.
    pub ray_map: BTreeMap<usize, usize>,
}

/// Re-embeds the subfan generated by the given cones into the coordinates of
/// the span of their union. The lineality space of the host fan is carried
/// along as the first coordinates.
pub fn subfan_in_span(fan: &Fan, cones: &[ConeId]) -> Result<SpanEmbedding, FanError> {
    let closure = fan.subfan_closure(cones);
    let mut ray_ids: Vec<usize> = closure
        .iter()
        .flat_map(|&c| fan.cone(c).rays.iter().copied())
        .collect();
    ray_ids.sort_unstable();
    ray_ids.dedup();
    // Deterministic basis: lineality, then independent rays in id order.
    let mut basis_cols: Vec<Vec<Q>> = fan.lineality().to_vec();
    let mut rank = basis_cols.len();
    for &r in &ray_ids {
        let mut m = basis_cols.clone();
        m.push(fan.ray(r).to_vec());
        if Mat::from_rows(m).rank() > rank {
            basis_cols.push(fan.ray(r).to_vec());
            rank += 1;
        }
    }
    let basis = if basis_cols.is_empty() {
        Mat::zeros(fan.ambient_dim(), 0)
    } else {
        Mat::from_cols(basis_cols.clone())
    };
    let d = basis.ncols();
    let coords = |v: &[Q]| -> Result<Vec<Q>, FanError> {
        let c = basis
            .solve_vec(v)
            .ok_or_else(|| FanError::Input("vector leaves the subfan span".into()))?;
        if basis.mul_vec(&c) != v.to_vec() {
            return Err(FanError::Input("vector leaves the subfan span".into()));
        }
        Ok(c)
    };
    let mut new_rays = Vec::with_capacity(ray_ids.len());
    let mut ray_map = BTreeMap::new();
    for (k, &r) in ray_ids.iter().enumerate() {
        new_rays.push(coords(fan.ray(r))?);
        ray_map.insert(r, k);
    }
    let lin_count = fan.lineality().len();
    let mut lineality = Vec::new();
    for i in 0..lin_count {
        let mut e = vec![Q::zero(); d];
        e[i] = num::One::one();
        lineality.push(e);
    }
    let maximal = fan.subfan_maximal(&closure);
    let max_sets: Vec<Vec<usize>> = maximal
        .iter()
        .map(|&c| fan.cone(c).rays.iter().map(|&r| ray_map[&r]).collect())
        .collect();
    let embedded = Arc::new(build_fan(d, new_rays, max_sets, lineality)?);
    let mut cone_map = BTreeMap::new();
    for &c in &closure {
        let key: Vec<usize> = fan.cone(c).rays.iter().map(|&r| ray_map[&r]).collect();
        let id = embedded
            .cone_by_rays(&key)
            .expect("faces of embedded maximal cones agree with the host fan");
        cone_map.insert(c, id);
    }
    Ok(SpanEmbedding {
        fan: embedded,
        basis,
        cone_map,
        ray_map,
    })
}

/// The star of a cone projected along its span: the transverse fan.
pub struct QuotientEmbedding {
    pub fan: Arc<Fan>,
    /// Projection from host coordinates onto the quotient coordinates.
    pub proj: Mat,
    /// Host star cone -> quotient cone.
    pub cone_map: BTreeMap<ConeId, ConeId>,
}

pub fn star_quotient(fan: &Fan, tau: ConeId) -> Result<QuotientEmbedding, FanError> {
    // Kernel of the projection: lineality plus the span of tau.
    let mut kernel_rows: Vec<Vec<Q>> = fan.lineality().to_vec();
    for &r in &fan.cone(tau).span_rays {
        kernel_rows.push(fan.ray(r).to_vec());
    }
    let n = fan.ambient_dim();
    let (kr, pivots) = if kernel_rows.is_empty() {
        (Mat::zeros(0, n), vec![])
    } else {
        Mat::from_rows(kernel_rows).rref()
    };
    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    let free: Vec<usize> = (0..n).filter(|c| !pivot_set.contains(c)).collect();
    let mut proj = Mat::zeros(free.len(), n);
    for (row, &fc) in free.iter().enumerate() {
        proj.set(row, fc, num::One::one());
        for (i, &p) in pivots.iter().enumerate() {
            let v = -kr.get(i, fc).clone();
            proj.set(row, p, v);
        }
    }
    // Project the rays of the star, dedupe directions, reduce per cone to the
    // extreme ones.
    let star: Vec<ConeId> = fan.star(tau).to_vec();
    let mut dir_index: BTreeMap<Vec<Q>, usize> = BTreeMap::new();
    let mut cone_dirs: BTreeMap<ConeId, Vec<Vec<Q>>> = BTreeMap::new();
    for &sigma in &star {
        let mut dirs: Vec<Vec<Q>> = Vec::new();
        for &r in &fan.cone(sigma).rays {
            let p = proj.mul_vec(fan.ray(r));
            if vec_is_zero(&p) {
                continue;
            }
            let norm = normalize_positive(&p);
            if !dirs.contains(&norm) {
                dirs.push(norm);
            }
        }
        // extreme reduction within this cone
        let extreme: Vec<Vec<Q>> = dirs
            .iter()
            .enumerate()
            .filter(|(k, dir)| {
                let others: Vec<Vec<Q>> = dirs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != *k)
                    .map(|(_, d)| d.clone())
                    .collect();
                !lp::in_cone(&others, &[], dir)
            })
            .map(|(_, d)| d.clone())
            .collect();
        for d in &extreme {
            dir_index.entry(d.clone()).or_insert(0);
        }
        cone_dirs.insert(sigma, extreme);
    }
    for (k, v) in dir_index.values_mut().enumerate() {
        *v = k;
    }
    let rays: Vec<Vec<Q>> = dir_index.keys().cloned().collect();
    let star_max: Vec<ConeId> = star
        .iter()
        .copied()
        .filter(|&s| fan.star(s).iter().all(|&c| c == s || !star.contains(&c)))
        .collect();
    let max_sets: Vec<Vec<usize>> = star_max
        .iter()
        .map(|&s| cone_dirs[&s].iter().map(|d| dir_index[d]).collect())
        .collect();
    let quotient = Arc::new(build_fan(free.len(), rays, max_sets, vec![])?);
    let mut cone_map = BTreeMap::new();
    for &sigma in &star {
        let key: Vec<usize> = {
            let mut k: Vec<usize> = cone_dirs[&sigma].iter().map(|d| dir_index[d]).collect();
            k.sort_unstable();
            k
        };
        let id = quotient.cone_by_rays(&key).ok_or_else(|| {
            FanError::Input("star quotient does not close up into a fan".into())
        })?;
        cone_map.insert(sigma, id);
    }
    Ok(QuotientEmbedding {
        fan: quotient,
        proj,
        cone_map,
    })
}

impl Fan {
    /// All faces of the given cones, sorted.
    pub fn subfan_closure(&self, cones: &[ConeId]) -> Vec<ConeId> {
        let mut out = BTreeSet::new();
        for &c in cones {
            out.extend(self.cone(c).faces.iter().copied());
        }
        out.into_iter().collect()
    }

    /// Maximal elements of a set of cones.
    pub fn subfan_maximal(&self, cones: &[ConeId]) -> Vec<ConeId> {
        let set: BTreeSet<ConeId> = cones.iter().copied().collect();
        cones
            .iter()
            .copied()
            .filter(|&c| {
                self.star(c)
                    .iter()
                    .all(|&above| above == c || !set.contains(&above))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::tests::{line_fan, quadrant_fan};
    use crate::rat::qvec;

    fn simplicial_2cone() -> Fan {
        build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap()
    }

    fn cone_over_square() -> Fan {
        build_fan(
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
        .unwrap()
    }

    #[test]
    fn edge_split() {
        let f = simplicial_2cone();
        let top = f.max_cones()[0];
        let (refined, map) = star_subdivision(&f, top, &qvec(&[1, 1])).unwrap();
        assert_eq!(refined.max_cones().len(), 2);
        for &mc in refined.max_cones() {
            assert_eq!(map.assignment[mc], top);
        }
    }

    #[test]
    fn star_subdivision_needs_interior_ray() {
        let f = simplicial_2cone();
        let top = f.max_cones()[0];
        let err = star_subdivision(&f, top, &qvec(&[1, 0])).unwrap_err();
        assert!(matches!(err, FanError::RayNotInterior));
    }

    #[test]
    fn cone_over_square_central_split() {
        let f = cone_over_square();
        let top = f.max_cones()[0];
        let (refined, map) = star_subdivision(&f, top, &qvec(&[0, 0, 1])).unwrap();
        assert_eq!(refined.max_cones().len(), 4);
        assert!(refined.is_simplicial());
        assert!(map.cones_over(top).len() > 0);
    }

    #[test]
    fn barycentric_of_2cone() {
        let f = simplicial_2cone();
        let (refined, map, steps) = barycentric_subdivision(&f).unwrap();
        assert_eq!(refined.max_cones().len(), 2);
        assert_eq!(steps.len(), 1);
        assert!(!map.is_identity());
    }

    #[test]
    fn barycentric_of_ray_is_identity() {
        let f = build_fan(1, vec![qvec(&[1])], vec![vec![0]], vec![]).unwrap();
        let (refined, map, steps) = barycentric_subdivision(&f).unwrap();
        assert_eq!(refined.cone_count(), f.cone_count());
        assert!(map.is_identity());
        assert!(steps.is_empty());
    }

    #[test]
    fn barycentric_of_cone_over_square() {
        let f = cone_over_square();
        let (refined, _, _) = barycentric_subdivision(&f).unwrap();
        assert_eq!(refined.max_cones().len(), 8);
        assert!(refined.is_simplicial());
    }

    #[test]
    fn completion_of_quadrant() {
        let f = simplicial_2cone();
        let completed = complete_convex_fan(&f, &qvec(&[-1, -1])).unwrap();
        assert_eq!(completed.max_cones().len(), 3);
        assert_eq!(
            classify_support(&completed).unwrap(),
            SupportClass::Complete
        );
    }

    #[test]
    fn completion_of_split_half_plane() {
        let f = build_fan(
            2,
            vec![qvec(&[0, 1]), qvec(&[1, 0]), qvec(&[0, -1])],
            vec![vec![0, 1], vec![1, 2]],
            vec![],
        )
        .unwrap();
        let completed = complete_convex_fan(&f, &qvec(&[-1, 0])).unwrap();
        assert_eq!(completed.max_cones().len(), 4);
    }

    #[test]
    fn completion_rejects_forward_ray() {
        let f = simplicial_2cone();
        let err = complete_convex_fan(&f, &qvec(&[1, 0])).unwrap_err();
        assert!(matches!(err, FanError::RayNotOpposite));
    }

    #[test]
    fn products() {
        let l = line_fan();
        let p = product_fan(&l, &l).unwrap();
        assert_eq!(p.f_vector(), vec![1, 4, 4]);
        assert_eq!(classify_support(&p).unwrap(), SupportClass::Complete);
        let q = quadrant_fan();
        let trivial = build_fan(0, vec![], vec![], vec![]).unwrap();
        let same = product_fan(&q, &trivial).unwrap();
        assert_eq!(same.f_vector(), q.f_vector());
        // line x single-quadrant: half-space fan in 3d with 2 maximal cones
        let quad = simplicial_2cone();
        let half = product_fan(&l, &quad).unwrap();
        assert_eq!(half.max_cones().len(), 2);
        assert_eq!(half.f_vector(), vec![1, 4, 5, 2]);
    }

    #[test]
    fn local_product_detection() {
        let f = quadrant_fan();
        let ray = f.cones_of_dim(1)[0];
        assert!(detect_local_product(&f, ray).has_structure);
        // cone over a square at one of its rays has no structure
        let c = cone_over_square();
        let ray = c.cones_of_dim(1)[0];
        assert!(!detect_local_product(&c, ray).has_structure);
        // completion has a local product at the added ray
        let completed = complete_convex_fan(&simplicial_2cone(), &qvec(&[-1, -1])).unwrap();
        let added = completed
            .cones_of_dim(1)
            .into_iter()
            .find(|&r| completed.cone(r).rays == vec![2])
            .unwrap();
        assert!(detect_local_product(&completed, added).has_structure);
    }

    #[test]
    fn semismall_detection() {
        // Edge split of a 2-cone: semi-small, not small.
        let f = simplicial_2cone();
        let (_, map) = star_subdivision(&f, f.max_cones()[0], &qvec(&[1, 1])).unwrap();
        let rep = detect_semismall(&map).unwrap();
        assert!(rep.semi_small);
        assert!(!rep.small);
        // Barycentric ray of a 3-cone: not semi-small.
        let c3 = build_fan(
            3,
            vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0]), qvec(&[0, 0, 1])],
            vec![vec![0, 1, 2]],
            vec![],
        )
        .unwrap();
        let (_, map) = star_subdivision(&c3, c3.max_cones()[0], &qvec(&[1, 1, 1])).unwrap();
        assert!(!detect_semismall(&map).unwrap().semi_small);
        // Identity is small.
        let id = SubdivisionMap::new(Arc::new(f.clone()), Arc::new(f)).unwrap();
        let rep = detect_semismall(&id).unwrap();
        assert!(rep.semi_small && rep.small);
    }

    #[test]
    fn star_quotient_of_quadrant_fan() {
        let f = quadrant_fan();
        let ray = f
            .cones_of_dim(1)
            .into_iter()
            .find(|&r| f.cone(r).rays == vec![0])
            .unwrap();
        let q = star_quotient(&f, ray).unwrap();
        // transverse fan of a ray in the plane: the complete line fan
        assert_eq!(q.fan.ambient_dim(), 1);
        assert_eq!(q.fan.max_cones().len(), 2);
        assert_eq!(classify_support(&q.fan).unwrap(), SupportClass::Complete);
    }

    #[test]
    fn span_embedding_of_fiber() {
        let f = simplicial_2cone();
        let (refined, map) = star_subdivision(&f, f.max_cones()[0], &qvec(&[1, 2])).unwrap();
        let top = map.target.max_cones()[0];
        let fiber = map.fiber(top);
        let emb = subfan_in_span(&refined, &fiber).unwrap();
        assert_eq!(emb.fan.ambient_dim(), 2);
        assert_eq!(emb.fan.max_cones().len(), 2);
        assert_eq!(
            classify_support(&emb.fan).unwrap(),
            SupportClass::Convex
        );
    }
}
