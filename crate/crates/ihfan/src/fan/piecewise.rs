//! Piecewise linear and piecewise polynomial functions on fans, with exact
//! convexity certification at the walls.

use super::subdivide::SubdivisionMap;
use super::{ConeId, Fan, FanError};
use crate::linalg::mat::Mat;
use crate::linalg::poly::Poly;
use crate::rat::{dot, Q};
use num::{Signed, Zero};

/// One linear form per maximal cone, agreeing on shared faces. Forms are
/// ambient covectors; as a graded function this sits in degree 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear {
    pub forms: Vec<Vec<Q>>,
}

impl PiecewiseLinear {
    /// Validates agreement on all common faces (including the lineality
    /// space) and wraps the per-maximal-cone forms.
    pub fn new(fan: &Fan, forms: Vec<Vec<Q>>) -> Result<Self, FanError> {
        if forms.len() != fan.max_cones().len() {
            return Err(FanError::NotPiecewiseLinear(format!(
                "{} forms for {} maximal cones",
                forms.len(),
                fan.max_cones().len()
            )));
        }
        for f in &forms {
            if f.len() != fan.ambient_dim() {
                return Err(FanError::NotPiecewiseLinear(
                    "form has wrong coordinate count".into(),
                ));
            }
        }
        let pl = PiecewiseLinear { forms };
        pl.validate(fan)?;
        Ok(pl)
    }

    fn validate(&self, fan: &Fan) -> Result<(), FanError> {
        let max = fan.max_cones();
        for i in 0..max.len() {
            for j in i + 1..max.len() {
                let common: Vec<usize> = fan
                    .cone(max[i])
                    .rays
                    .iter()
                    .copied()
                    .filter(|r| fan.cone(max[j]).rays.contains(r))
                    .collect();
                let diff: Vec<Q> = crate::rat::vec_sub(&self.forms[i], &self.forms[j]);
                for &r in &common {
                    if !dot(&diff, fan.ray(r)).is_zero() {
                        return Err(FanError::NotPiecewiseLinear(format!(
                            "forms {i} and {j} disagree on shared ray {r}"
                        )));
                    }
                }
                for l in fan.lineality() {
                    if !dot(&diff, l).is_zero() {
                        return Err(FanError::NotPiecewiseLinear(format!(
                            "forms {i} and {j} disagree on the lineality space"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// A global linear function, the same form on every maximal cone.
    pub fn global(fan: &Fan, form: Vec<Q>) -> Result<Self, FanError> {
        Self::new(fan, vec![form; fan.max_cones().len()])
    }

    /// Determined by prescribed values on the rays; simplicial fans only.
    /// On each maximal cone the form is pinned by the ray values, vanishing
    /// on the lineality space and on a deterministic complement of the span.
    pub fn from_ray_values(fan: &Fan, values: &[Q]) -> Result<Self, FanError> {
        if !fan.is_simplicial() {
            return Err(FanError::NotSimplicial);
        }
        if values.len() != fan.rays().len() {
            return Err(FanError::Input("one value per ray required".into()));
        }
        let n = fan.ambient_dim();
        let mut forms = Vec::new();
        for &mc in fan.max_cones() {
            let mut rows: Vec<Vec<Q>> = Vec::new();
            let mut rhs: Vec<Q> = Vec::new();
            for &r in &fan.cone(mc).rays {
                rows.push(fan.ray(r).to_vec());
                rhs.push(values[r].clone());
            }
            for l in fan.lineality() {
                rows.push(l.clone());
                rhs.push(Q::zero());
            }
            // complete to full rank with standard covectors pinned to zero
            let mut rank = Mat::from_rows(rows.clone()).rank();
            for k in 0..n {
                if rank == n {
                    break;
                }
                let mut e = vec![Q::zero(); n];
                e[k] = num::One::one();
                let mut m = rows.clone();
                m.push(e.clone());
                if Mat::from_rows(m).rank() > rank {
                    rows.push(e);
                    rhs.push(Q::zero());
                    rank += 1;
                }
            }
            let a = Mat::from_rows(rows);
            let form = a
                .solve_vec(&rhs)
                .ok_or_else(|| FanError::Input("inconsistent ray values".into()))?;
            forms.push(form);
        }
        Self::new(fan, forms)
    }

    pub fn form_on(&self, fan: &Fan, max_cone: ConeId) -> &[Q] {
        let idx = fan
            .max_cones()
            .iter()
            .position(|&c| c == max_cone)
            .expect("form lookup on a maximal cone");
        &self.forms[idx]
    }

    /// The linear form on an arbitrary cone (via any maximal cone above it).
    pub fn form_on_cone(&self, fan: &Fan, cone: ConeId) -> &[Q] {
        let mc = fan
            .star(cone)
            .iter()
            .copied()
            .find(|c| fan.max_cones().contains(c))
            .expect("every cone lies under a maximal cone");
        self.form_on(fan, mc)
    }

    pub fn value(&self, fan: &Fan, x: &[Q]) -> Option<Q> {
        let cone = fan.smallest_cone_containing(x)?;
        Some(dot(self.form_on_cone(fan, cone), x))
    }

    /// Adds a global linear function.
    pub fn plus_linear(&self, form: &[Q]) -> PiecewiseLinear {
        PiecewiseLinear {
            forms: self.forms.iter().map(|f| crate::rat::vec_add(f, form)).collect(),
        }
    }

    pub fn scaled(&self, c: &Q) -> PiecewiseLinear {
        PiecewiseLinear {
            forms: self.forms.iter().map(|f| crate::rat::vec_scale(f, c)).collect(),
        }
    }

    pub fn plus(&self, other: &PiecewiseLinear) -> PiecewiseLinear {
        PiecewiseLinear {
            forms: self
                .forms
                .iter()
                .zip(&other.forms)
                .map(|(a, b)| crate::rat::vec_add(a, b))
                .collect(),
        }
    }

    /// Restricts to a subdivision source: the form on each finer maximal cone
    /// is the form of the coarse cone containing it.
    pub fn pullback(&self, map: &SubdivisionMap) -> PiecewiseLinear {
        let forms = map
            .source
            .max_cones()
            .iter()
            .map(|&c| self.form_on_cone(&map.target, map.assignment[c]).to_vec())
            .collect();
        PiecewiseLinear { forms }
    }
}

/// One polynomial per maximal cone of a fan, in ambient coordinates.
#[derive(Clone, Debug)]
pub struct PiecewisePoly {
    pub polys: Vec<Poly>,
}

impl PiecewisePoly {
    pub fn from_linear(pl: &PiecewiseLinear) -> Self {
        PiecewisePoly {
            polys: pl.forms.iter().map(|f| Poly::linear(f)).collect(),
        }
    }

    pub fn mul(&self, other: &PiecewisePoly) -> PiecewisePoly {
        PiecewisePoly {
            polys: self
                .polys
                .iter()
                .zip(&other.polys)
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    pub strictly_convex: bool,
}

/// Wall test: across every interior wall the neighboring form must not
/// overestimate (convex), respectively must underestimate strictly (strictly
/// convex).
pub fn check_convexity(f: &PiecewiseLinear, fan: &Fan) -> Result<ConvexityReport, FanError> {
    f.validate(fan)?;
    let n = fan.ambient_dim();
    let mut convex = true;
    let mut strict = true;
    for (w, above) in super::classify::wall_census(fan) {
        if above.len() != 2 {
            continue;
        }
        let (a, b) = (above[0], above[1]);
        let verdict = wall_verdict(f, fan, w, a, b, n)?;
        convex &= verdict >= 0;
        strict &= verdict > 0;
    }
    Ok(ConvexityReport {
        convex,
        strictly_convex: convex && strict,
    })
}

/// Sign of the wall inequality: positive means strictly convex across the
/// wall, zero means the two forms agree, negative means concave.
fn wall_verdict(
    f: &PiecewiseLinear,
    fan: &Fan,
    wall: ConeId,
    a: ConeId,
    b: ConeId,
    _dim: usize,
) -> Result<i32, FanError> {
    let fa = f.form_on_cone(fan, a).to_vec();
    let fb = f.form_on_cone(fan, b).to_vec();
    // evaluate f_a - f_b on a ray of b off the wall span
    let wall_span: Vec<Vec<Q>> = fan
        .cone(wall)
        .span_rays
        .iter()
        .map(|&r| fan.ray_q(r).to_vec())
        .collect();
    let span_rank = wall_span.len();
    let v = fan
        .cone(b)
        .rays
        .iter()
        .copied()
        .find(|&r| {
            let mut m = wall_span.clone();
            m.push(fan.ray_q(r).to_vec());
            Mat::from_rows(m).rank() > span_rank
        })
        .ok_or_else(|| FanError::NotPiecewiseLinear("wall exhausts its cone".into()))?;
    let delta = dot(&crate::rat::vec_sub(&fb, &fa), fan.ray(v));
    Ok(if delta.is_positive() {
        1
    } else if delta.is_zero() {
        0
    } else {
        -1
    })
}

/// Relative convexity: the wall test run inside every fiber of the
/// subdivision. `f` lives on the source fan.
pub fn check_relative_convexity(
    f: &PiecewiseLinear,
    map: &SubdivisionMap,
) -> Result<ConvexityReport, FanError> {
    let source = &map.source;
    f.validate(source)?;
    let mut convex = true;
    let mut strict = true;
    for (sigma, _) in map.target.cones() {
        let d = map.target.cone(sigma).dim;
        if d <= map.target.lineality_dim() {
            continue;
        }
        let fiber = map.fiber(sigma);
        let fiber_set: std::collections::BTreeSet<ConeId> = fiber.iter().copied().collect();
        for &w in &fiber {
            if source.cone(w).dim != d - 1 {
                continue;
            }
            let above: Vec<ConeId> = source
                .star(w)
                .iter()
                .copied()
                .filter(|&c| fiber_set.contains(&c) && source.cone(c).dim == d)
                .collect();
            if above.len() != 2 {
                continue;
            }
            let verdict = wall_verdict(f, source, w, above[0], above[1], d)?;
            convex &= verdict >= 0;
            strict &= verdict > 0;
        }
    }
    Ok(ConvexityReport {
        convex,
        strictly_convex: convex && strict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::tests::{line_fan, quadrant_fan};
    use crate::fan::{build_fan, star_subdivision};
    use crate::rat::{q, qvec};

    #[test]
    fn absolute_value_is_strictly_convex() {
        let f = line_fan();
        let abs = PiecewiseLinear::new(&f, vec![qvec(&[1]), qvec(&[-1])]).unwrap();
        let rep = check_convexity(&abs, &f).unwrap();
        assert!(rep.convex && rep.strictly_convex);
        let linear = PiecewiseLinear::global(&f, qvec(&[1])).unwrap();
        let rep = check_convexity(&linear, &f).unwrap();
        assert!(rep.convex && !rep.strictly_convex);
    }

    #[test]
    fn taxicab_on_quadrants() {
        let f = quadrant_fan();
        // |x| + |y|: forms per quadrant in max-cone order
        let l = crate::fan::tests::taxicab(&f);
        let rep = check_convexity(&l, &f).unwrap();
        assert!(rep.strictly_convex);
        // adding a global linear function changes no flags
        let shifted = l.plus_linear(&qvec(&[3, -2]));
        let rep2 = check_convexity(&shifted, &f).unwrap();
        assert_eq!(rep, rep2);
        // concave version fails
        let neg = l.scaled(&q(-1));
        let rep3 = check_convexity(&neg, &f).unwrap();
        assert!(!rep3.convex);
    }

    #[test]
    fn ray_values_must_match_only_simplicial() {
        let sq = build_fan(
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
        assert!(matches!(
            PiecewiseLinear::from_ray_values(&sq, &vec![q(1); 4]),
            Err(FanError::NotSimplicial)
        ));
    }

    #[test]
    fn relative_convexity_in_fibers() {
        let f = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap();
        let (refined, map) = star_subdivision(&f, f.max_cones()[0], &qvec(&[1, 1])).unwrap();
        // 0 on the boundary rays, 1 on the new interior ray: relatively
        // strictly convex
        let vals = vec![q(0), q(0), q(-1)];
        let hat = PiecewiseLinear::from_ray_values(&refined, &vals).unwrap();
        let rep = check_relative_convexity(&hat, &map).unwrap();
        assert!(rep.strictly_convex);
        // a pullback from the target is relatively flat
        let flat = PiecewiseLinear::global(&refined, qvec(&[2, 5])).unwrap();
        let rep = check_relative_convexity(&flat, &map).unwrap();
        assert!(rep.convex && !rep.strictly_convex);
    }

    #[test]
    fn mismatched_forms_rejected() {
        let f = quadrant_fan();
        // forms that disagree on the shared ray e1
        let bad = PiecewiseLinear::new(
            &f,
            vec![qvec(&[1, 1]), qvec(&[2, 1]), qvec(&[1, 1]), qvec(&[5, 1])],
        );
        assert!(matches!(bad, Err(FanError::NotPiecewiseLinear(_))));
    }
}
