//! Inductive construction of the minimal extension sheaf starting from a
//! cone: each stalk is the free cover of the sections of the partial sheaf
//! over the boundary of its cone, with restriction maps given by the chosen
//! deterministic generator lifts extended module-linearly.

use super::sections::{ih_space, sections};
use super::{SheafError, SheafModel, Stalk};
use crate::fan::{ConeId, Fan};
use crate::linalg::graded::GradedMap;
use crate::linalg::mat::Mat;
use crate::rat::Q;
use num::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Linear combination of degree-2 operators with the given coefficients.
pub fn combine_ops(ops: &[GradedMap], coeffs: &[Q]) -> GradedMap {
    assert_eq!(ops.len(), coeffs.len());
    let mut out = GradedMap::new(2);
    let mut degrees: std::collections::BTreeSet<i64> = std::collections::BTreeSet::new();
    for op in ops {
        degrees.extend(op.blocks.keys().copied());
    }
    for d in degrees {
        let mut acc: Option<Mat> = None;
        for (op, c) in ops.iter().zip(coeffs) {
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

/// Applies a monomial in the given degree-2 operators to a vector sitting in
/// degree `start`.
pub fn apply_monomial(
    ops: &[GradedMap],
    expt: &[u32],
    start: i64,
    v: &[Q],
) -> Vec<Q> {
    let mut cur = v.to_vec();
    let mut d = start;
    for (var, &p) in expt.iter().enumerate() {
        for _ in 0..p {
            let block = ops[var]
                .block(d)
                .expect("operator block below the cap");
            cur = block.mul_vec(&cur);
            d += 2;
        }
    }
    cur
}

/// Builds the minimal extension sheaf of the fan starting at `origin`, up to
/// the even degree `cap`.
pub fn minimal_extension_sheaf(
    fan: &Arc<Fan>,
    origin: ConeId,
    cap: i64,
) -> Result<SheafModel, SheafError> {
    let needed = 2 * fan.quotient_dim() as i64;
    if cap < needed {
        return Err(SheafError::CapTooLow { cap, needed });
    }
    if cap % 2 != 0 {
        return Err(SheafError::Internal("cap must be even".into()));
    }
    let mut model = SheafModel::new_empty(fan.clone(), cap, origin)?;
    model.stalks[origin] = Stalk {
        gens: vec![0],
        vars: fan.cone(origin).dim,
    };
    // Cone ids are sorted by (dimension, rays), so iterating the star in id
    // order processes boundaries before their cones.
    let star: Vec<ConeId> = fan.star(origin).to_vec();
    for &sigma in &star {
        if sigma == origin {
            continue;
        }
        let boundary: Vec<ConeId> = fan
            .cone(sigma)
            .faces
            .iter()
            .copied()
            .filter(|&f| f != sigma)
            .collect();
        let sec = sections(&model, &boundary)?;
        let quot = ih_space(&sec);
        let mut gens: Vec<i64> = Vec::new();
        for (d, k) in quot.dims.iter() {
            gens.extend(std::iter::repeat(d).take(k));
        }
        let bound = (fan.cone(sigma).dim - fan.cone(origin).dim) as i64;
        if let Some(&top) = gens.last() {
            if top >= bound {
                return Err(SheafError::DegreeBound(format!(
                    "stalk generator of degree {top} at a cone {bound} dimensions above the origin"
                )));
            }
        }
        let vars = fan.cone(sigma).dim;
        let stalk = Stalk { gens: gens.clone(), vars };
        // Span-coordinate operators on the boundary sections.
        let span_ops: Vec<GradedMap> = (0..vars)
            .map(|j| combine_ops(&sec.ops, model.span_coordinate(sigma, j)))
            .collect();
        // Generator lifts: deterministic unit sections at the quotient's
        // chosen complement indices.
        let mut lifts: Vec<(i64, Vec<Q>)> = Vec::new();
        for (d, _) in quot.dims.iter() {
            for &idx in &quot.lifts[&d] {
                let mut v = vec![Q::zero(); sec.dim(d)];
                v[idx] = num::One::one();
                lifts.push((d, v));
            }
        }
        // Restriction of every stalk basis element, per degree, to every
        // boundary cone with a nonzero stalk.
        let mut res_blocks: BTreeMap<ConeId, GradedMap> = BTreeMap::new();
        let mut d = 0;
        while d <= cap {
            let basis = stalk.basis(d);
            let mut section_vectors: Vec<Vec<Q>> = Vec::with_capacity(basis.len());
            for (k, e) in &basis {
                let (g, lift) = &lifts[*k];
                section_vectors.push(apply_monomial(&span_ops, e, *g, lift));
            }
            // Flabbiness of the construction in this degree.
            if sec.dim(d) > 0 {
                let m = if section_vectors.is_empty() {
                    Mat::zeros(sec.dim(d), 0)
                } else {
                    Mat::from_cols(section_vectors.clone())
                };
                if m.rank() != sec.dim(d) {
                    return Err(SheafError::Internal(format!(
                        "free cover misses boundary sections at degree {d}"
                    )));
                }
            }
            for &rho in &boundary {
                if model.stalk(rho).is_zero() {
                    continue;
                }
                let rows = model.stalk(rho).dim(d);
                let mut block = Mat::zeros(rows, basis.len());
                for (col, sv) in section_vectors.iter().enumerate() {
                    let comp = sec.component(&model, d, sv, rho);
                    for (r, x) in comp.into_iter().enumerate() {
                        block.set(r, col, x);
                    }
                }
                res_blocks
                    .entry(rho)
                    .or_insert_with(|| GradedMap::new(0))
                    .insert_block(d, block);
            }
            d += 2;
        }
        model.stalks[sigma] = stalk;
        for (rho, map) in res_blocks {
            model.res.insert((sigma, rho), map);
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::build_fan;
    use crate::rat::qvec;
    use crate::sheaf::sections::{boundary_vanishing_sections, ih, ih_space, sections};

    fn arc(fan: crate::fan::Fan) -> Arc<Fan> {
        Arc::new(fan)
    }

    #[test]
    fn structure_sheaf_on_simplicial_fans() {
        // On a simplicial fan every stalk has a single degree-0 generator.
        let fan = arc(crate::fan::tests::quadrant_fan());
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 6).unwrap();
        for (id, _) in fan.cones() {
            assert_eq!(model.stalk(id).gens, vec![0], "cone {id}");
        }
        model.check_flabby().unwrap();
    }

    #[test]
    fn cone_over_square_apex_generators() {
        let fan = arc(build_fan(
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
        .unwrap());
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 6).unwrap();
        let apex = fan.max_cones()[0];
        assert_eq!(model.stalk(apex).gens, vec![0, 2]);
        // matches the recursive toric g-vector of the cone
        assert_eq!(crate::fan::toric_g_cone(&fan, apex), vec![1, 1]);
        // boundary sections of the structure sheaf over the cone boundary
        // have generator degrees {0, 2}
        let boundary: Vec<_> = fan
            .cone(apex)
            .faces
            .iter()
            .copied()
            .filter(|&f| f != apex)
            .collect();
        let sec = sections(&model, &boundary).unwrap();
        let quot = ih_space(&sec);
        assert_eq!(quot.dims.dim(0), 1);
        assert_eq!(quot.dims.dim(2), 1);
    }

    #[test]
    fn line_fan_sections() {
        let fan = arc(crate::fan::tests::line_fan());
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 6).unwrap();
        let all: Vec<_> = (0..fan.cone_count()).collect();
        let sec = sections(&model, &all).unwrap();
        // piecewise polynomials on the line fan: dims 1, 2, 2, ...
        assert_eq!(sec.dim(0), 1);
        assert_eq!(sec.dim(2), 2);
        assert_eq!(sec.dim(4), 2);
        // IH of the complete line fan: 1, 1
        let quot = ih(&model, false).unwrap();
        assert_eq!(quot.dim(0), 1);
        assert_eq!(quot.dim(2), 1);
        assert_eq!(quot.dim(4), 0);
    }

    #[test]
    fn quadrant_fan_ih() {
        let fan = arc(crate::fan::tests::quadrant_fan());
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 8).unwrap();
        let all: Vec<_> = (0..fan.cone_count()).collect();
        let sec = sections(&model, &all).unwrap();
        // piecewise linear functions on the four quadrants: dimension 4
        assert_eq!(sec.dim(2), 4);
        let quot = ih(&model, false).unwrap();
        assert_eq!(quot.display_compact(), "0:1 2:2 4:1");
    }

    #[test]
    fn boundary_vanishing_on_single_cones() {
        // One ray in the line: generated by x in degree 2.
        let fan = arc(build_fan(1, vec![qvec(&[1])], vec![vec![0]], vec![]).unwrap());
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 6).unwrap();
        let bv = boundary_vanishing_sections(&model).unwrap();
        assert_eq!(bv.dim(0), 0);
        assert_eq!(bv.dim(2), 1);
        assert_eq!(bv.dim(4), 1);
        // Quadrant: generated by xy in degree 4.
        let fan = arc(build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap());
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 8).unwrap();
        let bv = boundary_vanishing_sections(&model).unwrap();
        assert_eq!(bv.dim(0), 0);
        assert_eq!(bv.dim(2), 0);
        assert_eq!(bv.dim(4), 1);
        let quot = ih_space(&bv);
        assert_eq!(quot.dims.dim(4), 1);
    }

    #[test]
    fn extension_from_a_ray() {
        // L at a ray of the quadrant fan: supported on its star, rank one.
        let fan = arc(crate::fan::tests::quadrant_fan());
        let ray = fan.cones_of_dim(1)[0];
        let model = minimal_extension_sheaf(&fan, ray, 6).unwrap();
        assert!(model.stalk(fan.minimal_cone()).is_zero());
        assert_eq!(model.stalk(ray).gens, vec![0]);
        for &up in fan.star(ray) {
            assert_eq!(model.stalk(up).gens, vec![0]);
        }
    }

    #[test]
    fn zero_dimensional_fan() {
        let fan = arc(build_fan(0, vec![], vec![], vec![]).unwrap());
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 0).unwrap();
        let quot = ih(&model, false).unwrap();
        assert_eq!(quot.dim(0), 1);
        assert_eq!(quot.total_dim(), 1);
    }
}
