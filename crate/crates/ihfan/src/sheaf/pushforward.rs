//! Pushforward of a sheaf model along a subdivision: stalks become section
//! spaces over the fibers, re-expressed as certified free modules over the
//! target cone spans.

use super::minimal::{apply_monomial, combine_ops};
use super::sections::{ih_space, sections};
use super::{SheafError, SheafModel, Stalk};
use crate::fan::SubdivisionMap;
use crate::linalg::graded::GradedMap;
use crate::linalg::mat::Mat;
use crate::linalg::module::free_dim;
use crate::rat::Q;
use num::Zero;
use std::collections::BTreeMap;

/// Pushes the model on the subdivision source down to the target fan.
/// The target must be pointed.
pub fn pushforward(map: &SubdivisionMap, source_model: &SheafModel) -> Result<SheafModel, SheafError> {
    if !std::sync::Arc::ptr_eq(&map.source, &source_model.fan)
        && map.source.rays() != source_model.fan.rays()
    {
        return Err(SheafError::Internal("model does not live on the subdivision source".into()));
    }
    let target = &map.target;
    let cap = source_model.cap;
    let mut model = SheafModel::new_empty(target.clone(), cap, map.assignment[source_model.origin])?;
    // Per processed cone: the fiber section space plus the degreewise
    // free-to-section isomorphism and its inverse.
    struct FiberData {
        sec: super::SectionSpace,
        to_sections: BTreeMap<i64, Mat>,
        from_sections: BTreeMap<i64, Mat>,
    }
    let mut fibers: BTreeMap<usize, FiberData> = BTreeMap::new();
    for (sigma, sdata) in target.cones() {
        let fiber = map.fiber(sigma);
        let sec = sections(source_model, &fiber)?;
        let quot = ih_space(&sec);
        let mut gens: Vec<i64> = Vec::new();
        for (d, k) in quot.dims.iter() {
            gens.extend(std::iter::repeat(d).take(k));
        }
        let vars = sdata.dim;
        let stalk = Stalk { gens: gens.clone(), vars };
        if gens.is_empty() {
            fibers.insert(
                sigma,
                FiberData {
                    sec,
                    to_sections: BTreeMap::new(),
                    from_sections: BTreeMap::new(),
                },
            );
            continue;
        }
        // Span-coordinate operators of the target cone on the fiber sections.
        let span_ops: Vec<GradedMap> = (0..vars)
            .map(|j| combine_ops(&sec.ops, model.span_coordinate(sigma, j)))
            .collect();
        let mut lifts: Vec<(i64, Vec<Q>)> = Vec::new();
        for (d, _) in quot.dims.iter() {
            for &idx in &quot.lifts[&d] {
                let mut v = vec![Q::zero(); sec.dim(d)];
                v[idx] = num::One::one();
                lifts.push((d, v));
            }
        }
        // Freeness certificate: the induced map from the free module on the
        // generators must be bijective in every degree up to the cap.
        let mut to_sections: BTreeMap<i64, Mat> = BTreeMap::new();
        let mut from_sections: BTreeMap<i64, Mat> = BTreeMap::new();
        let mut d = 0;
        while d <= cap {
            let expected = free_dim(vars, &gens, d);
            let actual = sec.dim(d);
            if expected != actual {
                return Err(SheafError::FreenessCheckFailed(format!(
                    "fiber of target cone {sigma} has dimension {actual} in degree {d}, free module predicts {expected}"
                )));
            }
            let basis = stalk.basis(d);
            let mut cols: Vec<Vec<Q>> = Vec::with_capacity(basis.len());
            for (k, e) in &basis {
                let (g, lift) = &lifts[*k];
                cols.push(apply_monomial(&span_ops, e, *g, lift));
            }
            let iso = if cols.is_empty() {
                Mat::zeros(actual, 0)
            } else {
                Mat::from_cols(cols)
            };
            if expected > 0 {
                let inv = iso.inverse().ok_or_else(|| {
                    SheafError::FreenessCheckFailed(format!(
                        "fiber of target cone {sigma} is not free in degree {d}"
                    ))
                })?;
                from_sections.insert(d, inv);
            }
            to_sections.insert(d, iso);
            d += 2;
        }
        // Restriction maps to every face.
        for &tau in &sdata.faces {
            if tau == sigma {
                continue;
            }
            let tau_data = &fibers[&tau];
            if model.stalk(tau).is_zero() {
                continue;
            }
            let mut res = GradedMap::new(0);
            let mut d = 0;
            while d <= cap {
                let basis = stalk.basis(d);
                let rows = model.stalk(tau).dim(d);
                let mut block = Mat::zeros(rows, basis.len());
                if rows > 0 && !basis.is_empty() {
                    let iso = &to_sections[&d];
                    for col in 0..basis.len() {
                        let sv = iso.col(col);
                        // Components on the carriers of the face fiber.
                        let mut comps: BTreeMap<usize, Vec<Q>> = BTreeMap::new();
                        for &c in &tau_data.sec.carriers {
                            comps.insert(c, sec.component(source_model, d, &sv, c));
                        }
                        let tau_coords = tau_data.sec.express(d, &comps)?;
                        let free_coords = tau_data.from_sections[&d].mul_vec(&tau_coords);
                        for (r, x) in free_coords.into_iter().enumerate() {
                            block.set(r, col, x);
                        }
                    }
                }
                res.insert_block(d, block);
                d += 2;
            }
            model.res.insert((sigma, tau), res);
        }
        model.stalks[sigma] = stalk;
        fibers.insert(
            sigma,
            FiberData {
                sec,
                to_sections,
                from_sections,
            },
        );
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::{build_fan, star_subdivision, SubdivisionMap};
    use crate::rat::qvec;
    use crate::sheaf::minimal_extension_sheaf;
    use std::sync::Arc;

    #[test]
    fn identity_pushforward_is_isomorphic() {
        let fan = Arc::new(crate::fan::tests::quadrant_fan());
        let map = SubdivisionMap::new(fan.clone(), fan.clone()).unwrap();
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 6).unwrap();
        let pushed = pushforward(&map, &model).unwrap();
        for (id, _) in fan.cones() {
            assert_eq!(pushed.stalk(id).gens, model.stalk(id).gens);
        }
    }

    #[test]
    fn edge_split_pushforward() {
        let fan = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap();
        let top = fan.max_cones()[0];
        let (refined, map) = star_subdivision(&fan, top, &qvec(&[1, 1])).unwrap();
        let model = minimal_extension_sheaf(&refined, refined.minimal_cone(), 6).unwrap();
        let pushed = pushforward(&map, &model).unwrap();
        // apex stalk: piecewise linear sections on two subcones
        assert_eq!(pushed.stalk(top).gens, vec![0, 2]);
        pushed.check_flabby().unwrap();
    }

    #[test]
    fn barycentric_pushforward_of_2cone() {
        let fan = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap();
        let (refined, map, _) = crate::fan::barycentric_subdivision(&fan).unwrap();
        let model = minimal_extension_sheaf(&refined, refined.minimal_cone(), 6).unwrap();
        let pushed = pushforward(&map, &model).unwrap();
        let top = map.target.max_cones()[0];
        assert_eq!(pushed.stalk(top).gens, vec![0, 2]);
    }
}
