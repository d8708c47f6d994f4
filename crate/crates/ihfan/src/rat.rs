//! Exact rational scalars and small vector helpers.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// The scalar type used everywhere. No floating point exists in this crate.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qvec(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&n| q(n)).collect()
}

/// Parses `"p/q"` or `"p"` (optionally signed, whitespace-trimmed).
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("invalid rational numerator: {s:?}"))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| format!("invalid rational denominator: {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in rational: {s:?}"));
    }
    Ok(Q::new(n, d))
}

/// Formats reduced, `"p"` when the denominator is one, `"p/q"` otherwise.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn vec_add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Q], c: &Q) -> Vec<Q> {
    a.iter().map(|x| x * c).collect()
}

pub fn vec_neg(a: &[Q]) -> Vec<Q> {
    a.iter().map(|x| -x).collect()
}

pub fn vec_is_zero(a: &[Q]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Canonical representative of the positive-scaling class of a nonzero vector:
/// scaled so the first nonzero coordinate has absolute value one.
pub fn normalize_positive(v: &[Q]) -> Vec<Q> {
    match v.iter().find(|x| !x.is_zero()) {
        None => v.to_vec(),
        Some(first) => {
            let s = first.abs();
            v.iter().map(|x| x / &s).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3", "-7", "1/2", "-4/6", "0"] {
            let x = parse_q(s).unwrap();
            let y = parse_q(&fmt_q(&x)).unwrap();
            assert_eq!(x, y);
        }
        assert_eq!(fmt_q(&parse_q("-4/6").unwrap()), "-2/3");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn normalization_is_scale_invariant() {
        let v = qvec(&[0, -3, 6]);
        let w = vec_scale(&v, &qr(5, 2));
        assert_eq!(normalize_positive(&v), normalize_positive(&w));
    }
}
