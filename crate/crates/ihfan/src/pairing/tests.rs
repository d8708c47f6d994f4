use super::*;
use crate::fan::{build_fan, star_subdivision, PiecewisePoly};
use crate::rat::{q, qvec};
use num::{Signed, Zero};
use crate::sheaf::{ih, minimal_extension_sheaf};
use std::sync::Arc;

fn ctx_of(fan: crate::fan::Fan) -> IhContext {
    IhContext::new(Arc::new(fan), None).unwrap()
}

#[test]
fn single_ray_pairing() {
    // <[x], [1]> = 1 on the one-ray fan in the line.
    let ctx = ctx_of(build_fan(1, vec![qvec(&[1])], vec![vec![0]], vec![]).unwrap());
    assert_eq!(ctx.ih_dims().display_compact(), "0:1");
    assert_eq!(ctx.bv_dims().display_compact(), "2:1");
    assert_eq!(ctx.pair(2, &[q(1)], 0, &[q(1)]).unwrap(), q(1));
}

#[test]
fn quadrant_pairing() {
    // <[xy], [1]> = 1 on the quadrant.
    let ctx = ctx_of(
        build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap(),
    );
    assert_eq!(ctx.ih_dims().display_compact(), "0:1");
    assert_eq!(ctx.bv_dims().display_compact(), "4:1");
    assert_eq!(ctx.pair(4, &[q(1)], 0, &[q(1)]).unwrap(), q(1));
}

#[test]
fn complete_fan_pairing_extremes() {
    let ctx = ctx_of(crate::fan::tests::quadrant_fan());
    assert_eq!(ctx.ih_dims().display_compact(), "0:1 2:2 4:1");
    // boundary-vanishing coincides with plain on complete fans
    assert_eq!(ctx.bv_dims(), ctx.ih_dims());
    let block = ctx.pairing_block(0).unwrap();
    assert_eq!((block.nrows(), block.ncols()), (1, 1));
    assert!(!block.get(0, 0).is_zero());
    let data = poincare_pairing(&ctx).unwrap();
    assert!(data.is_nondegenerate());
}

#[test]
fn concrete_matches_abstract_on_cone_over_square() {
    let fan = Arc::new(
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
        .unwrap(),
    );
    let ctx = IhContext::new(fan.clone(), None).unwrap();
    let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 8).unwrap();
    for (id, _) in fan.cones() {
        assert_eq!(ctx.stalk_gens[&id], model.stalk(id).gens, "cone {id}");
    }
    // quotient dimensions agree with the abstract route
    let abstract_ih = ih(&model, false).unwrap();
    assert_eq!(ctx.ih_dims(), &abstract_ih);
}

#[test]
fn edge_split_multiplicity_form_is_negative() {
    let fan = build_fan(
        2,
        vec![qvec(&[1, 0]), qvec(&[0, 1])],
        vec![vec![0, 1]],
        vec![],
    )
    .unwrap();
    let top = fan.max_cones()[0];
    let (refined, map) = star_subdivision(&fan, top, &qvec(&[1, 1])).unwrap();
    let hat = crate::fan::PiecewiseLinear::from_ray_values(&refined, &[q(0), q(0), q(-1)]).unwrap();
    let forms = w_form(&map, map.source.minimal_cone(), &hat).unwrap();
    // identity part at the minimal cone, one negative-definite line on top
    let form_top = &forms[&top];
    assert_eq!(form_top.center, 2);
    assert_eq!(form_top.dim(2), 1);
    let b = &form_top.blocks[&2];
    assert!(b.get(0, 0).is_negative(), "<w, w> = {:?}", b.get(0, 0));
    let form_min = &forms[&map.target.minimal_cone()];
    assert_eq!(form_min.dim(0), 1);
    assert!(form_min.blocks[&0].get(0, 0).is_positive());
}

#[test]
fn a_bilinearity_and_symmetry() {
    let fan = crate::fan::tests::quadrant_fan();
    let ctx = ctx_of(fan.clone());
    let l = crate::fan::tests::taxicab(&fan);
    // <h a, b> = <a, h b> for classes a (bv side, degree 0) and b (degree 2)
    let act_bv = ctx.action_bv(&l).unwrap();
    let act = ctx.action(&l).unwrap();
    let dims2 = ctx.ih_dims().dim(2);
    for col in 0..dims2 {
        let mut b = vec![q(0); dims2];
        b[col] = q(1);
        // a = the degree-0 generator on the bv side
        let ha = act_bv.block(0).unwrap().col(0);
        let lhs = ctx.pair(2, &ha, 2, &b).unwrap();
        let hb = act.block(2).unwrap().mul_vec(&b);
        let rhs = ctx.pair(0, &[q(1)], 4, &hb).unwrap();
        assert_eq!(lhs, rhs, "bilinearity fails at column {col}");
    }
    // symmetry of the boundary-vanishing restriction
    let data = poincare_pairing(&ctx).unwrap();
    assert!(data.symmetric.is_transpose_symmetric());
}

#[test]
fn disjoint_supports_pair_to_zero() {
    // Hat functions on opposite rays of the line fan multiply to zero.
    let fan = crate::fan::tests::line_fan();
    let ctx = EvaluationContext::new(&fan).unwrap();
    let plus = PiecewisePoly {
        polys: vec![
            crate::linalg::poly::Poly::linear(&qvec(&[1])),
            crate::linalg::poly::Poly::zero(1),
        ],
    };
    let minus = PiecewisePoly {
        polys: vec![
            crate::linalg::poly::Poly::zero(1),
            crate::linalg::poly::Poly::linear(&qvec(&[-1])),
        ],
    };
    assert_eq!(ctx.evaluate_scalar(&plus.mul(&minus)).unwrap(), q(0));
}

#[test]
fn refinement_independence_of_evaluation() {
    // A nonsimplicial quasi-convex fan: the cone over the square. Pair
    // classes through the default refinement, then re-evaluate the same
    // representatives on a strictly finer simplicial refinement.
    let fan = Arc::new(
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
        .unwrap(),
    );
    let ctx = IhContext::new(fan.clone(), None).unwrap();
    let n2 = 2 * fan.ambient_dim() as i64;
    // finer: barycentric subdivision of the refinement source
    let (finer, _, _) = crate::fan::barycentric_subdivision(&ctx.map.source).unwrap();
    let fine_eval = EvaluationContext::new(&finer).unwrap();
    let fine_map = crate::fan::SubdivisionMap::new(finer.clone(), ctx.map.source.clone()).unwrap();
    let mut d = 0;
    while d <= n2 {
        let bdim = ctx.bv_dims().dim(n2 - d);
        let pdim = ctx.ih_dims().dim(d);
        for r in 0..bdim {
            for c in 0..pdim {
                let mut a = vec![q(0); bdim];
                a[r] = q(1);
                let mut b = vec![q(0); pdim];
                b[c] = q(1);
                let coarse_val = ctx.pair(n2 - d, &a, d, &b).unwrap();
                // same product function, evaluated on the finer fan
                let product = ctx
                    .representative_bv(n2 - d, &a)
                    .mul(&ctx.representative(d, &b));
                let fine_polys: Vec<_> = finer
                    .max_cones()
                    .iter()
                    .map(|&mc| {
                        let coarse = fine_map.assignment[mc];
                        let idx = ctx
                            .map
                            .source
                            .max_cones()
                            .iter()
                            .position(|&m| ctx.map.source.is_face(coarse, m))
                            .unwrap();
                        product.polys[idx].clone()
                    })
                    .collect();
                let fine_val = fine_eval
                    .evaluate_scalar(&PiecewisePoly { polys: fine_polys })
                    .unwrap();
                assert_eq!(coarse_val, fine_val, "degree {d} entry ({r},{c})");
            }
        }
        d += 2;
    }
}

#[test]
fn refinement_independence_of_invariants() {
    // Two genuinely different refinements give the same dimensions and the
    // same signatures of the symmetric restriction.
    let fan = Arc::new(
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
        .unwrap(),
    );
    let c1 = IhContext::new(fan.clone(), None).unwrap();
    let refinement2 = {
        let simp = crate::fan::simplicial_refinement(&fan).unwrap();
        let (finer, _, _) = crate::fan::barycentric_subdivision(&simp).unwrap();
        crate::fan::SubdivisionMap::new(finer, fan.clone()).unwrap()
    };
    let c2 = IhContext::new(fan.clone(), Some(refinement2)).unwrap();
    assert_eq!(c1.ih_dims(), c2.ih_dims());
    assert_eq!(c1.bv_dims(), c2.bv_dims());
    let p1 = poincare_pairing(&c1).unwrap();
    let p2 = poincare_pairing(&c2).unwrap();
    let mid = fan.ambient_dim() as i64;
    let _ = mid;
    for (&d, b1) in &p1.symmetric.blocks {
        let b2 = &p2.symmetric.blocks[&d];
        if b1.nrows() == b1.ncols() && b1.is_symmetric() && 2 * d == p1.total {
            assert_eq!(b1.inertia(), b2.inertia(), "signature at degree {d}");
        }
        assert_eq!(b1.rank(), b2.rank(), "rank at degree {d}");
    }
}

#[test]
fn whole_fan_block_of_complete_fan() {
    let fan = Arc::new(crate::fan::tests::quadrant_fan());
    let l = crate::fan::tests::taxicab(&fan);
    let block = whole_fan_block(fan, &l).unwrap();
    // on a complete fan the multiplicity space is all of IH
    assert_eq!(block.ctx.w_dim(0), 1);
    assert_eq!(block.ctx.w_dim(2), 2);
    assert_eq!(block.ctx.w_dim(4), 1);
    let form = block.form().unwrap();
    assert_eq!(form.center, 2);
    // Q on IH^2 has inertia (1, 1, 0) for the taxicab function
    let q2 = form.blocks[&2].clone();
    assert!(q2.is_symmetric());
    assert_eq!(q2.inertia(), (1, 1, 0));
}
