//! Sparse multivariate polynomials over the rationals.
//!
//! Used for piecewise polynomial representatives and for the symbolic route
//! of the evaluation functional (sum over a common denominator with exact
//! division by linear forms).

use crate::rat::Q;
use num::{One, Zero};
use std::collections::BTreeMap;

/// Exponent-vector keyed polynomial in a fixed number of variables.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0)
                    .map(|(i, &p)| if p == 1 { format!("x{i}") } else { format!("x{i}^{p}") })
                    .collect();
                if mono.is_empty() {
                    crate::rat::fmt_q(c)
                } else {
                    format!("{}*{}", crate::rat::fmt_q(c), mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Poly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: Q) -> Self {
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars], c);
        }
        p
    }

    pub fn one(vars: usize) -> Self {
        Poly::constant(vars, Q::one())
    }

    /// The linear form with the given coefficients.
    pub fn linear(coeffs: &[Q]) -> Self {
        let mut p = Poly::zero(coeffs.len());
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; coeffs.len()];
                e[i] = 1;
                p.terms.insert(e, c.clone());
            }
        }
        p
    }

    pub fn monomial(vars: usize, expt: &[u32], c: Q) -> Self {
        assert_eq!(expt.len(), vars);
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(expt.to_vec(), c);
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn coefficient(&self, expt: &[u32]) -> Q {
        self.terms.get(expt).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    fn insert(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.vars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.vars, other.vars);
        let mut out = Poly::zero(self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one(self.vars);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, point: &[Q]) -> Q {
        assert_eq!(point.len(), self.vars);
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    term *= &point[i];
                }
            }
            acc += term;
        }
        acc
    }

    /// Rewrites in new coordinates: variable `i` becomes the linear form
    /// `sub[i]` (a polynomial in the target variable set).
    pub fn substitute_linear(&self, sub: &[Vec<Q>]) -> Poly {
        assert_eq!(sub.len(), self.vars);
        let target_vars = sub.first().map(|s| s.len()).unwrap_or(0);
        let mut out = Poly::zero(target_vars);
        for (e, c) in &self.terms {
            let mut term = Poly::constant(target_vars, c.clone());
            for (i, &p) in e.iter().enumerate() {
                let form = Poly::linear(&sub[i]);
                for _ in 0..p {
                    term = term.mul(&form);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Exact division by a nonzero linear form; `None` when not divisible.
    pub fn div_exact_linear(&self, form: &[Q]) -> Option<Poly> {
        assert_eq!(form.len(), self.vars);
        let k = form.iter().position(|c| !c.is_zero())?;
        let lead = form[k].clone();
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.vars);
        // Long division in variable k; the remainder must come out zero.
        loop {
            let Some((e, c)) = rem
                .terms
                .iter()
                .filter(|(e, _)| e[k] > 0)
                .max_by_key(|(e, _)| e[k])
                .map(|(e, c)| (e.clone(), c.clone()))
            else {
                break;
            };
            let mut qe = e.clone();
            qe[k] -= 1;
            let qc = c / &lead;
            let qterm = Poly::monomial(self.vars, &qe, qc);
            quot = quot.add(&qterm);
            rem = rem.sub(&qterm.mul(&Poly::linear(form)));
        }
        if rem.is_zero() {
            Some(quot)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qvec};

    #[test]
    fn arithmetic_and_eval() {
        let x = Poly::linear(&qvec(&[1, 0]));
        let y = Poly::linear(&qvec(&[0, 1]));
        let p = x.add(&y).pow(2); // (x+y)^2
        assert_eq!(p.eval(&qvec(&[2, 3])), q(25));
        assert_eq!(p.degree(), Some(2));
    }

    #[test]
    fn exact_division() {
        let x = Poly::linear(&qvec(&[1, 0]));
        let y = Poly::linear(&qvec(&[0, 1]));
        let p = x.add(&y).mul(&x.sub(&y)); // x^2 - y^2
        let d = p.div_exact_linear(&qvec(&[1, 1])).unwrap();
        assert_eq!(d, x.sub(&y));
        assert!(p.div_exact_linear(&qvec(&[1, 2])).is_none());
    }

    #[test]
    fn substitution() {
        // p(x, y) = x*y, substitute x = s, y = s + t
        let p = Poly::linear(&qvec(&[1, 0])).mul(&Poly::linear(&qvec(&[0, 1])));
        let s = p.substitute_linear(&[qvec(&[1, 0]), qvec(&[1, 1])]);
        // s*(s+t) = s^2 + s t
        assert_eq!(s.eval(&qvec(&[2, 3])), q(10));
    }
}
