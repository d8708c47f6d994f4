//! Combinatorial oracles: f-to-h transforms, the alternating-sum local
//! h-vector, and the recursive toric h/g-vectors of cones and complete fans.
//!
//! These are deliberately independent of the sheaf machinery; they validate
//! it on instances where the combinatorial answer is classical.

use super::subdivide::SubdivisionMap;
use super::{ConeId, Fan, FanError};
use std::collections::BTreeMap;

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let mut num = 1i64;
    let mut den = 1i64;
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// h-vector of a simplicial complex with `f[k]` faces of cardinality `k`
/// (`f[0] = 1` for the empty face), of dimension `d` in the cone sense.
pub fn f_to_h(f: &[usize], d: usize) -> Vec<i64> {
    let mut h = vec![0i64; d + 1];
    for (k, hk) in h.iter_mut().enumerate() {
        for i in 0..=k {
            let sign = if (k - i) % 2 == 0 { 1 } else { -1 };
            let count = f.get(i).copied().unwrap_or(0) as i64;
            *hk += sign * binom((d - i) as i64, (k - i) as i64) * count;
        }
    }
    h
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn t_minus_one_pow(k: usize) -> Vec<i64> {
    let mut out = vec![1i64];
    for _ in 0..k {
        out = poly_mul(&out, &[-1, 1]);
    }
    out
}

fn poly_add_into(acc: &mut Vec<i64>, other: &[i64]) {
    if acc.len() < other.len() {
        acc.resize(other.len(), 0);
    }
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

/// Toric g-vector of a cone (by quotient dimension and face recursion),
/// memoized by ray set within one fan.
pub fn toric_g_cone(fan: &Fan, cone: ConeId) -> Vec<i64> {
    let mut memo: BTreeMap<ConeId, Vec<i64>> = BTreeMap::new();
    g_rec(fan, cone, &mut memo)
}

fn h_rec(fan: &Fan, cone: ConeId, memo: &mut BTreeMap<ConeId, Vec<i64>>) -> Vec<i64> {
    let m = fan.lineality_dim();
    let d = fan.cone(cone).dim - m;
    let mut h = vec![0i64];
    h.clear();
    for &f in &fan.cone(cone).faces {
        if f == cone {
            continue;
        }
        let df = fan.cone(f).dim - m;
        let g = g_rec(fan, f, memo);
        poly_add_into(&mut h, &poly_mul(&g, &t_minus_one_pow(d - 1 - df)));
    }
    if h.is_empty() {
        h.push(1); // the minimal cone
    }
    h
}

fn g_rec(fan: &Fan, cone: ConeId, memo: &mut BTreeMap<ConeId, Vec<i64>>) -> Vec<i64> {
    if let Some(g) = memo.get(&cone) {
        return g.clone();
    }
    let m = fan.lineality_dim();
    let d = fan.cone(cone).dim - m;
    let g = if d == 0 {
        vec![1]
    } else {
        let h = h_rec(fan, cone, memo);
        let keep = (d - 1) / 2;
        let mut g = vec![0i64; keep + 1];
        for (i, gi) in g.iter_mut().enumerate() {
            let hi = h.get(i).copied().unwrap_or(0);
            let hprev = if i == 0 { 0 } else { h.get(i - 1).copied().unwrap_or(0) };
            *gi = hi - hprev;
        }
        while g.last() == Some(&0) {
            g.pop();
        }
        g
    };
    memo.insert(cone, g.clone());
    g
}

/// Toric h-vector of a complete fan: the face-lattice recursion summed over
/// all cones. For complete fans this is the intersection cohomology table.
pub fn toric_h_fan(fan: &Fan) -> Vec<i64> {
    let n = fan.quotient_dim();
    let mut memo: BTreeMap<ConeId, Vec<i64>> = BTreeMap::new();
    let mut h: Vec<i64> = vec![];
    for (id, c) in fan.cones() {
        let d = c.dim - fan.lineality_dim();
        let g = g_rec(fan, id, &mut memo);
        poly_add_into(&mut h, &poly_mul(&g, &t_minus_one_pow(n - d)));
    }
    h.resize(n + 1, 0);
    h
}

/// Stanley's alternating-sum local h-vector of a simplicial subdivision of a
/// simplicial cone: `sum over vertex subsets W of (-1)^{|V \ W|} h(Gamma_W)`.
pub fn local_h_oracle(map: &SubdivisionMap) -> Result<Vec<i64>, FanError> {
    let target = &map.target;
    let source = &map.source;
    if !target.is_pointed() || !source.is_pointed() {
        return Err(FanError::NotPointed);
    }
    if target.max_cones().len() != 1 {
        return Err(FanError::Input(
            "local h oracle needs a single maximal target cone".into(),
        ));
    }
    let sigma = target.max_cones()[0];
    if !target.cone(sigma).is_simplicial() {
        return Err(FanError::NotSimplicial);
    }
    if !source.is_simplicial() {
        return Err(FanError::SourceNotSimplicial);
    }
    let v: Vec<usize> = target.cone(sigma).rays.clone();
    let d = v.len();
    let mut ell = vec![0i64; d + 1];
    for mask in 0u32..(1 << d) {
        let w: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).map(|i| v[i]).collect();
        let w_id = target.cone_by_rays(&w).expect("simplicial cone face");
        // Source cones lying inside the face spanned by W.
        let mut f = vec![0usize; w.len() + 1];
        for (c, _) in source.cones() {
            if target.is_face(map.assignment[c], w_id) {
                f[source.cone(c).dim] += 1;
            }
        }
        let h = f_to_h(&f, w.len());
        let sign = if (d - w.len()) % 2 == 0 { 1 } else { -1 };
        for (k, hk) in h.iter().enumerate() {
            ell[k] += sign * hk;
        }
    }
    Ok(ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::build_fan;
    use crate::rat::qvec;

    #[test]
    fn f_to_h_quadrants() {
        assert_eq!(f_to_h(&[1, 4, 4], 2), vec![1, 2, 1]);
        assert_eq!(f_to_h(&[1, 6, 12, 8], 3), vec![1, 3, 3, 1]);
    }

    #[test]
    fn toric_g_of_cone_over_square() {
        let f = build_fan(
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
        let top = f.max_cones()[0];
        assert_eq!(toric_g_cone(&f, top), vec![1, 1]);
        for &facet in &f.cone(top).facets {
            assert_eq!(toric_g_cone(&f, facet), vec![1]);
        }
    }

    #[test]
    fn toric_h_of_simplicial_fans_matches_f_to_h() {
        let f = crate::fan::tests::quadrant_fan();
        assert_eq!(toric_h_fan(&f), f_to_h(&f.f_vector(), 2));
    }

    #[test]
    fn toric_h_of_cube_face_fan() {
        // Fan over the faces of the cube: h = (1, 5, 5, 1). The linear
        // coefficient is forced to be (number of rays) - (dimension).
        let mut rays = Vec::new();
        for x in [-1i64, 1] {
            for y in [-1i64, 1] {
                for z in [-1i64, 1] {
                    rays.push(qvec(&[x, y, z]));
                }
            }
        }
        // rays indexed by bit pattern (x,y,z) signs; facets fix one coord
        let mut cones = Vec::new();
        for axis in 0..3 {
            for side in 0..2 {
                let cone: Vec<usize> = (0..8)
                    .filter(|i| (i >> (2 - axis)) & 1 == side)
                    .collect();
                cones.push(cone);
            }
        }
        let f = build_fan(3, rays, cones, vec![]).unwrap();
        assert_eq!(f.f_vector(), vec![1, 8, 12, 6]);
        assert_eq!(toric_h_fan(&f), vec![1, 5, 5, 1]);
    }
}
