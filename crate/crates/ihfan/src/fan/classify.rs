//! Support classification: complete, convex, quasi-convex (boundary a
//! homology sphere), or none of these.

use super::{build_fan, ConeId, Fan, FanError};
use crate::linalg::mat::Mat;
use crate::rat::{dot, Q};
use num::Signed;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportClass {
    Complete,
    Convex,
    QuasiConvex,
    None,
}

impl SupportClass {
    /// Complete, convex and quasi-convex supports all admit boundary-relative
    /// section spaces.
    pub fn is_quasi_convex(self) -> bool {
        !matches!(self, SupportClass::None)
    }
}

/// Interior/boundary census of the codimension-one cones of a purely
/// full-dimensional fan. Returns (wall id, ids of full-dimensional cones
/// above it).
pub(crate) fn wall_census(fan: &Fan) -> Vec<(ConeId, Vec<ConeId>)> {
    let n = fan.ambient_dim();
    if n == 0 {
        return Vec::new();
    }
    fan.cones_of_dim(n - 1)
        .into_iter()
        .map(|w| {
            let above: Vec<ConeId> = fan
                .star(w)
                .iter()
                .copied()
                .filter(|&c| fan.cone(c).dim == n)
                .collect();
            (w, above)
        })
        .collect()
}

/// Maximal boundary cones of a purely full-dimensional fan: the
/// codimension-one cones lying in exactly one full-dimensional cone.
pub fn boundary_walls(fan: &Fan) -> Vec<ConeId> {
    wall_census(fan)
        .into_iter()
        .filter(|(_, above)| above.len() == 1)
        .map(|(w, _)| w)
        .collect()
}

pub fn classify_support(fan: &Fan) -> Result<SupportClass, FanError> {
    if !fan.is_pointed() {
        // Classification is invariant under projecting out the lineality
        // space; reduce to the pointed quotient.
        let q = super::subdivide::star_quotient(fan, fan.minimal_cone())?;
        return classify_support(&q.fan);
    }
    let n = fan.ambient_dim();
    if n == 0 {
        return Ok(SupportClass::Complete);
    }
    let dims: BTreeSet<usize> = fan.max_cones().iter().map(|&c| fan.cone(c).dim).collect();
    if dims.len() > 1 {
        return Err(FanError::MixedDimension);
    }
    let top = dims.into_iter().next().unwrap_or(0);
    if top < n {
        return Ok(SupportClass::None);
    }
    let census = wall_census(fan);
    debug_assert!(census.iter().all(|(_, above)| (1..=2).contains(&above.len())));
    let boundary: Vec<ConeId> = census
        .iter()
        .filter(|(_, above)| above.len() == 1)
        .map(|(w, _)| *w)
        .collect();
    if boundary.is_empty() {
        return Ok(SupportClass::Complete);
    }
    // Convex iff every boundary-wall supporting normal is nonnegative on the
    // whole support.
    let mut convex = true;
    'walls: for &w in &boundary {
        let c = census.iter().find(|(id, _)| *id == w).unwrap().1[0];
        let data = fan.cone(c);
        let pos = data.facets.iter().position(|&f| f == w).expect("wall is a facet");
        let u = &data.facet_normals[pos];
        for i in 0..fan.rays().len() {
            if dot(u, fan.ray_q(i)).is_negative() {
                convex = false;
                break 'walls;
            }
        }
    }
    if convex {
        return Ok(SupportClass::Convex);
    }
    // Quasi-convex iff a simplicial refinement of the boundary complex has
    // the reduced rational homology of a sphere of dimension n - 2.
    let boundary_fan = build_fan(
        fan.ambient_dim(),
        fan.rays().to_vec(),
        boundary.iter().map(|&w| fan.cone(w).rays.clone()).collect(),
        fan.lineality().to_vec(),
    )?;
    let refined = super::subdivide::simplicial_refinement(&boundary_fan)?;
    let simplices: Vec<Vec<usize>> = refined
        .max_cones()
        .iter()
        .map(|&c| refined.cone(c).rays.clone())
        .collect();
    let homology = reduced_homology(&simplices);
    let expect_deg = n as i64 - 2;
    let ok = homology
        .iter()
        .all(|(&d, &h)| if d == expect_deg { h == 1 } else { h == 0 })
        && homology.get(&expect_deg) == Some(&1);
    Ok(if ok { SupportClass::QuasiConvex } else { SupportClass::None })
}

/// Reduced rational simplicial homology of the complex generated by the given
/// faces (vertex index sets). Keys are homological degrees starting at -1.
pub fn reduced_homology(faces: &[Vec<usize>]) -> BTreeMap<i64, usize> {
    let mut by_dim: BTreeMap<i64, BTreeSet<Vec<usize>>> = BTreeMap::new();
    // close under subsets
    let mut stack: Vec<Vec<usize>> = faces
        .iter()
        .map(|f| {
            let mut s = f.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    while let Some(f) = stack.pop() {
        if !seen.insert(f.clone()) {
            continue;
        }
        for i in 0..f.len() {
            let mut g = f.clone();
            g.remove(i);
            if !seen.contains(&g) {
                stack.push(g);
            }
        }
        by_dim.entry(f.len() as i64 - 1).or_default().insert(f);
    }
    if by_dim.is_empty() {
        return BTreeMap::new();
    }
    let top = *by_dim.keys().next_back().unwrap();
    let index: BTreeMap<i64, BTreeMap<Vec<usize>, usize>> = by_dim
        .iter()
        .map(|(&d, fs)| (d, fs.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect()))
        .collect();
    // boundary_d : C_d -> C_{d-1}
    let boundary = |d: i64| -> Mat {
        let rows = index.get(&(d - 1)).map(|m| m.len()).unwrap_or(0);
        let cols = index.get(&d).map(|m| m.len()).unwrap_or(0);
        let mut m = Mat::zeros(rows, cols);
        if rows == 0 || cols == 0 {
            return m;
        }
        for (f, &j) in &index[&d] {
            for i in 0..f.len() {
                let mut g = f.clone();
                g.remove(i);
                let r = index[&(d - 1)][&g];
                let sign = if i % 2 == 0 { crate::rat::q(1) } else { crate::rat::q(-1) };
                m.set(r, j, sign);
            }
        }
        m
    };
    let mut out = BTreeMap::new();
    for d in -1..=top {
        let dim_c = index.get(&d).map(|m| m.len()).unwrap_or(0);
        if dim_c == 0 {
            continue;
        }
        let rank_d = if d >= 0 { boundary(d).rank() } else { 0 };
        let rank_up = boundary(d + 1).rank();
        let h = dim_c - rank_d - rank_up;
        if h > 0 {
            out.insert(d, h);
        }
    }
    out
}

/// Used by `Q`-valued dot products above.
#[allow(dead_code)]
fn _ty(_: &Q) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::build_fan;
    use crate::rat::qvec;

    #[test]
    fn complete_quadrants() {
        let f = crate::fan::tests::quadrant_fan();
        assert_eq!(classify_support(&f).unwrap(), SupportClass::Complete);
    }

    #[test]
    fn single_cone_is_convex() {
        let f = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap();
        assert_eq!(classify_support(&f).unwrap(), SupportClass::Convex);
    }

    #[test]
    fn three_quadrants_quasi_convex() {
        // Boundary complex is two isolated rays: a 0-sphere.
        let f = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[-1, 0]), qvec(&[0, -1])],
            vec![vec![0, 1], vec![1, 2], vec![2, 3]],
            vec![],
        )
        .unwrap();
        assert_eq!(classify_support(&f).unwrap(), SupportClass::QuasiConvex);
    }

    #[test]
    fn opposite_quadrants_are_nothing() {
        let f = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[-1, 0]), qvec(&[0, -1])],
            vec![vec![0, 1], vec![2, 3]],
            vec![],
        )
        .unwrap();
        assert_eq!(classify_support(&f).unwrap(), SupportClass::None);
    }

    #[test]
    fn half_plane_with_lineality() {
        let f = build_fan(
            2,
            vec![qvec(&[1, 0])],
            vec![vec![0]],
            vec![qvec(&[0, 1])],
        )
        .unwrap();
        assert_eq!(classify_support(&f).unwrap(), SupportClass::Convex);
    }

    #[test]
    fn mixed_dimension_rejected() {
        let f = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[-1, -1])],
            vec![vec![0, 1], vec![2]],
            vec![],
        )
        .unwrap();
        assert!(matches!(classify_support(&f), Err(FanError::MixedDimension)));
    }

    #[test]
    fn homology_of_spheres() {
        // S^0: two points
        let h = reduced_homology(&[vec![0], vec![1]]);
        assert_eq!(h, BTreeMap::from([(0, 1)]));
        // circle from a triangle boundary
        let h = reduced_homology(&[vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(h, BTreeMap::from([(1, 1)]));
        // filled triangle is acyclic
        let h = reduced_homology(&[vec![0, 1, 2]]);
        assert!(h.is_empty());
        // empty complex on the empty face only
        let h = reduced_homology(&[vec![]]);
        assert_eq!(h, BTreeMap::from([(-1, 1)]));
    }

    #[test]
    fn ray_in_line_is_convex() {
        let f = build_fan(1, vec![qvec(&[1])], vec![vec![0]], vec![]).unwrap();
        assert_eq!(classify_support(&f).unwrap(), SupportClass::Convex);
    }
}
