//! The positive generator of the functions on a star vanishing off the
//! star's center: the product of the dual forms of a simplicial cone,
//! extended through a local product structure.

use super::PairingError;
use crate::fan::{detect_local_product, ConeId, Fan, FanError};
use crate::linalg::mat::Mat;
use crate::linalg::poly::Poly;
use crate::rat::Q;
use num::Zero;

/// A piecewise polynomial on the closed star of a cone.
#[derive(Clone, Debug)]
pub struct ChiGenerator {
    pub tau: ConeId,
    /// Maximal cones of the star, aligned with `polys`.
    pub star_max: Vec<ConeId>,
    /// Ambient-coordinate polynomials per maximal star cone.
    pub polys: Vec<Poly>,
    /// Graded degree: twice the pointed dimension of the cone.
    pub degree: i64,
}

impl ChiGenerator {
    pub fn poly_on(&self, cone: ConeId) -> Option<&Poly> {
        self.star_max
            .iter()
            .position(|&c| c == cone)
            .map(|i| &self.polys[i])
    }
}

/// Builds the generator for a simplicial cone at which the fan has a local
/// product structure: on each maximal star cone the product of the dual
/// forms of the cone's rays, vanishing on the complementary face.
pub fn chi_generator(fan: &Fan, tau: ConeId) -> Result<ChiGenerator, PairingError> {
    let tdata = fan.cone(tau);
    if !tdata.is_simplicial() {
        return Err(PairingError::Fan(FanError::NotSimplicial));
    }
    let product = detect_local_product(fan, tau);
    if !product.has_structure {
        return Err(PairingError::NoLocalProduct);
    }
    let n = fan.ambient_dim();
    let star_max: Vec<ConeId> = fan
        .star(tau)
        .iter()
        .copied()
        .filter(|c| fan.max_cones().contains(c))
        .collect();
    let mut polys = Vec::with_capacity(star_max.len());
    for &sigma in &star_max {
        let comp = product.complements[&sigma];
        let mut chi = Poly::one(n);
        for &r in &tdata.rays {
            // dual form: one on this ray, zero on the other rays of tau, on
            // the complement's rays, on the lineality, and on a deterministic
            // completion.
            let mut rows: Vec<Vec<Q>> = Vec::new();
            let mut rhs: Vec<Q> = Vec::new();
            rows.push(fan.ray(r).to_vec());
            rhs.push(num::One::one());
            for &other in &tdata.rays {
                if other != r {
                    rows.push(fan.ray(other).to_vec());
                    rhs.push(Q::zero());
                }
            }
            for &cr in &fan.cone(comp).rays {
                rows.push(fan.ray(cr).to_vec());
                rhs.push(Q::zero());
            }
            for l in fan.lineality() {
                rows.push(l.clone());
                rhs.push(Q::zero());
            }
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
            let u = Mat::from_rows(rows)
                .solve_vec(&rhs)
                .ok_or_else(|| PairingError::Internal("dual form solve failed".into()))?;
            chi = chi.mul(&Poly::linear(&u));
        }
        polys.push(chi);
    }
    let out = ChiGenerator {
        tau,
        star_max,
        polys,
        degree: 2 * (tdata.dim as i64 - fan.lineality_dim() as i64),
    };
    // Positive on the relative interior.
    let bary = fan.barycenter(tau);
    for p in &out.polys {
        if !num::Signed::is_positive(&p.eval(&bary)) {
            return Err(PairingError::Internal(
                "generator is not positive on the cone interior".into(),
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::build_fan;
    use crate::rat::{q, qvec};

    #[test]
    fn ray_in_quadrant_fan() {
        let fan = crate::fan::tests::quadrant_fan();
        let ray = fan
            .cones_of_dim(1)
            .into_iter()
            .find(|&r| fan.cone(r).rays == vec![0])
            .unwrap();
        let chi = chi_generator(&fan, ray).unwrap();
        assert_eq!(chi.degree, 2);
        assert_eq!(chi.star_max.len(), 2);
        // vanishes on the boundary rays of the star, positive inside
        for p in &chi.polys {
            assert_eq!(p.eval(&qvec(&[0, 1])), q(0));
            assert_eq!(p.eval(&qvec(&[0, -1])), q(0));
        }
        assert_eq!(chi.polys[0].eval(&qvec(&[1, 0])), q(1));
    }

    #[test]
    fn two_cone_inside_itself() {
        let fan = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap();
        let top = fan.max_cones()[0];
        let chi = chi_generator(&fan, top).unwrap();
        // product of the dual forms: xy
        assert_eq!(chi.polys[0].eval(&qvec(&[2, 3])), q(6));
        assert_eq!(chi.degree, 4);
    }

    #[test]
    fn nonsimplicial_cone_rejected() {
        let fan = build_fan(
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
        let top = fan.max_cones()[0];
        assert!(matches!(
            chi_generator(&fan, top),
            Err(PairingError::Fan(FanError::NotSimplicial))
        ));
    }
}
