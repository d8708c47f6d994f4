//! The evaluation functional on piecewise polynomials of a simplicial purely
//! full-dimensional fan: the sum over maximal cones of the cone's polynomial
//! divided by the product of its dual ray forms, normalized by the ray
//! determinant.
//!
//! For inputs of top degree the sum is an exact rational constant; it is read
//! off by evaluating the rational-function identity at deterministic sample
//! points off the hyperplane arrangement, with a fully symbolic common-
//! denominator route as fallback and cross-check.

use super::PairingError;
use crate::fan::{Fan, PiecewisePoly};
use crate::linalg::mat::Mat;
use crate::linalg::poly::Poly;
use crate::rat::{q, Q};
use num::{One, Signed, Zero};

/// Per-cone dual data for the evaluation sum.
#[derive(Clone, Debug)]
pub struct EvaluationContext {
    pub dim: usize,
    /// Aligned with the fan's maximal cones: (dual forms, |det| of the ray
    /// matrix).
    cones: Vec<(Vec<Vec<Q>>, Q)>,
}

impl EvaluationContext {
    pub fn new(fan: &Fan) -> Result<Self, PairingError> {
        let n = fan.ambient_dim();
        if !fan.is_pointed() {
            return Err(PairingError::NotSimplicial("fan must be pointed".into()));
        }
        let mut cones = Vec::new();
        for &mc in fan.max_cones() {
            let data = fan.cone(mc);
            if data.dim != n || !data.is_simplicial() {
                return Err(PairingError::NotSimplicial(format!(
                    "maximal cone {:?} is not a full-dimensional simplex",
                    data.rays
                )));
            }
            let v = Mat::from_cols(data.rays.iter().map(|&r| fan.ray(r).to_vec()).collect());
            let det = v.det();
            let inv = v.inverse().expect("simplicial ray matrix is invertible");
            let duals: Vec<Vec<Q>> = (0..n).map(|i| inv.row(i).to_vec()).collect();
            cones.push((duals, det.abs()));
        }
        Ok(EvaluationContext { dim: n, cones })
    }

    /// Deterministic sample points (1, t, t^2, ...) for small t, skipping any
    /// point on the dual hyperplane arrangement.
    fn sample_points(&self, count: usize) -> Vec<Vec<Q>> {
        let mut points = Vec::new();
        let mut t = 2i64;
        while points.len() < count && t < 500 {
            let mut x = Vec::with_capacity(self.dim);
            let mut p = Q::one();
            for _ in 0..self.dim {
                x.push(p.clone());
                p *= q(t);
            }
            let good = self
                .cones
                .iter()
                .all(|(duals, _)| duals.iter().all(|u| !crate::rat::dot(u, &x).is_zero()));
            if good {
                points.push(x);
            }
            t += 1;
        }
        points
    }

    fn sum_at(&self, f: &PiecewisePoly, x: &[Q]) -> Q {
        let mut acc = Q::zero();
        let terms = crate::par::map_range(self.cones.len(), |i| {
            let (duals, det) = &self.cones[i];
            let mut den = det.clone();
            for u in duals {
                den *= crate::rat::dot(u, x);
            }
            f.polys[i].eval(x) / den
        });
        for t in terms {
            acc += t;
        }
        acc
    }

    /// Exact value of the functional on a piecewise polynomial whose degree
    /// does not exceed the ambient dimension (graded degree at most 2n). The
    /// result is the constant value of the underlying rational identity.
    pub fn evaluate_scalar(&self, f: &PiecewisePoly) -> Result<Q, PairingError> {
        assert_eq!(f.polys.len(), self.cones.len());
        if f.polys.iter().all(|p| p.is_zero()) {
            return Ok(Q::zero());
        }
        let top = f.polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
        if top as usize > self.dim {
            return Err(PairingError::DenominatorNotCleared(
                "scalar evaluation needs degree at most the ambient dimension".into(),
            ));
        }
        let points = self.sample_points(2);
        if points.len() == 2 {
            let a = self.sum_at(f, &points[0]);
            let b = self.sum_at(f, &points[1]);
            if a == b {
                return Ok(a);
            }
        }
        // Fall back to the symbolic route.
        let p = self.evaluate(f)?;
        match p.degree() {
            None => Ok(Q::zero()),
            Some(0) => Ok(p.coefficient(&vec![0; self.dim])),
            Some(_) => Err(PairingError::DenominatorNotCleared(
                "evaluation did not collapse to a constant".into(),
            )),
        }
    }

    /// Fully symbolic evaluation over a common denominator; returns the exact
    /// polynomial value of the functional.
    pub fn evaluate(&self, f: &PiecewisePoly) -> Result<Poly, PairingError> {
        let n = self.dim;
        // numerator = sum_i f_i / det_i * prod_{j != i} den_j,
        // denominator = prod_j den_j  with den_j the product of dual forms.
        let dens: Vec<Poly> = self
            .cones
            .iter()
            .map(|(duals, _)| {
                let mut p = Poly::one(n);
                for u in duals {
                    p = p.mul(&Poly::linear(u));
                }
                p
            })
            .collect();
        let mut numerator = Poly::zero(n);
        for i in 0..self.cones.len() {
            if f.polys[i].is_zero() {
                continue;
            }
            let mut term = f.polys[i].scale(&(Q::one() / &self.cones[i].1));
            for (j, den) in dens.iter().enumerate() {
                if j != i {
                    term = term.mul(den);
                }
            }
            numerator = numerator.add(&term);
        }
        if numerator.is_zero() {
            return Ok(Poly::zero(n));
        }
        let mut quotient = numerator;
        for (duals, _) in &self.cones {
            for u in duals {
                quotient = quotient.div_exact_linear(u).ok_or_else(|| {
                    PairingError::DenominatorNotCleared(
                        "denominator does not divide the evaluation sum".into(),
                    )
                })?;
            }
        }
        Ok(quotient)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::PiecewiseLinear;
    use crate::rat::qvec;

    #[test]
    fn line_fan_values() {
        let fan = crate::fan::tests::line_fan();
        let ctx = EvaluationContext::new(&fan).unwrap();
        // l = |x| has top graded degree on the line: ev(l) = x/x + (-x)/(-x) = 2
        let l = PiecewiseLinear::new(&fan, vec![qvec(&[1]), qvec(&[-1])]).unwrap();
        let lp = PiecewisePoly::from_linear(&l);
        assert_eq!(ctx.evaluate_scalar(&lp).unwrap(), q(2));
        // ev(x * 1) = 0: a global linear function pairs to zero
        let x = PiecewiseLinear::global(&fan, qvec(&[1])).unwrap();
        let xp = PiecewisePoly::from_linear(&x);
        assert_eq!(ctx.evaluate_scalar(&xp).unwrap(), q(0));
        // symbolic route agrees
        let sym = ctx.evaluate(&lp).unwrap();
        assert_eq!(sym.coefficient(&[0]), q(2));
        assert!(ctx.evaluate(&xp).unwrap().is_zero());
        // above the top degree the scalar route refuses
        let l2 = lp.mul(&lp);
        assert!(ctx.evaluate_scalar(&l2).is_err());
    }

    #[test]
    fn quadrant_fan_taxicab_square() {
        let fan = crate::fan::tests::quadrant_fan();
        let ctx = EvaluationContext::new(&fan).unwrap();
        let l = crate::fan::tests::taxicab(&fan);
        let l2 = PiecewisePoly::from_linear(&l).mul(&PiecewisePoly::from_linear(&l));
        assert_eq!(ctx.evaluate_scalar(&l2).unwrap(), q(8));
        // symbolic cross-check
        let sym = ctx.evaluate(&l2).unwrap();
        assert_eq!(sym.coefficient(&[0, 0]), q(8));
        assert_eq!(sym.degree(), Some(0));
    }

    #[test]
    fn ray_rescaling_invariance() {
        let fan = crate::fan::tests::quadrant_fan();
        let mut rays = fan.rays().to_vec();
        rays[0] = crate::rat::vec_scale(&rays[0], &q(5));
        rays[3] = crate::rat::vec_scale(&rays[3], &crate::rat::qr(2, 7));
        let scaled = fan.rebuild_with_rays(rays).unwrap();
        let l = crate::fan::tests::taxicab(&fan);
        let l2 = PiecewisePoly::from_linear(&l).mul(&PiecewisePoly::from_linear(&l));
        let a = EvaluationContext::new(&fan).unwrap().evaluate_scalar(&l2).unwrap();
        let b = EvaluationContext::new(&scaled).unwrap().evaluate_scalar(&l2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nonsimplicial_rejected() {
        let fan = crate::fan::build_fan(
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
        assert!(EvaluationContext::new(&fan).is_err());
    }
}
