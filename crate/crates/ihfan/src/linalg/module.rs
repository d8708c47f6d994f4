//! Degreewise modules over polynomial rings, presented by operators.
//!
//! A module is a graded space truncated at a degree cap together with the
//! commuting degree-2 multiplication operators of the chosen coordinates.
//! Minimal generators, the Hilbert freeness tripwire, and the constructive
//! freeness certificate all work from that data alone.

use crate::linalg::graded::{GradedMap, GradedSpace};
use crate::linalg::mat::Mat;
use crate::rat::Q;
use num::Zero;

use super::LinalgError;

/// Monomial exponent vectors of the given polynomial degree, graded
/// lexicographic, deterministic.
pub fn monomials(vars: usize, degree: usize) -> Vec<Vec<u32>> {
    if vars == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; vars];
    fn rec(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, var: usize, left: usize) {
        if var + 1 == current.len() {
            current[var] = left as u32;
            out.push(current.clone());
            current[var] = 0;
            return;
        }
        for take in (0..=left).rev() {
            current[var] = take as u32;
            rec(out, current, var + 1, left - take);
        }
        current[var] = 0;
    }
    rec(&mut out, &mut current, 0, degree);
    out
}

pub fn monomial_count(vars: usize, degree: usize) -> usize {
    if vars == 0 {
        return if degree == 0 { 1 } else { 0 };
    }
    // C(degree + vars - 1, vars - 1)
    let mut num = 1usize;
    let mut den = 1usize;
    for k in 1..vars {
        num *= degree + k;
        den *= k;
    }
    num / den
}

fn monomial_index(list: &[Vec<u32>], e: &[u32]) -> usize {
    list.iter().position(|m| m == e).expect("monomial not found")
}

/// Matrix of multiplication by a linear form, from polynomial degree `deg`
/// to `deg + 1`, in the monomial bases above.
pub fn mult_by_linear(vars: usize, deg: usize, form: &[Q]) -> Mat {
    assert_eq!(form.len(), vars);
    let src = monomials(vars, deg);
    let dst = monomials(vars, deg + 1);
    let mut m = Mat::zeros(dst.len(), src.len());
    for (j, e) in src.iter().enumerate() {
        for (i, c) in form.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut f = e.clone();
            f[i] += 1;
            let r = monomial_index(&dst, &f);
            let cur = m.get(r, j).clone();
            m.set(r, j, cur + c);
        }
    }
    m
}

/// Pullback of degree-`deg` polynomials along a linear map of coordinate
/// spaces. `columns[j]` expresses source variable `j` as a linear form in the
/// target variables; the result maps source monomials to target monomials.
pub fn substitution_matrix(
    source_vars: usize,
    target_vars: usize,
    columns: &[Vec<Q>],
    deg: usize,
) -> Mat {
    assert_eq!(columns.len(), source_vars);
    use crate::linalg::poly::Poly;
    let src = monomials(source_vars, deg);
    let dst = monomials(target_vars, deg);
    let mut m = Mat::zeros(dst.len(), src.len());
    for (j, e) in src.iter().enumerate() {
        let mono = Poly::monomial(source_vars, e, num::One::one());
        let sub = mono.substitute_linear(columns);
        for (f, c) in sub.terms() {
            let r = monomial_index(&dst, f);
            m.set(r, j, c.clone());
        }
    }
    m
}

/// A graded space truncated at `cap` with `k` commuting degree-2 operators.
#[derive(Clone, Debug)]
pub struct DegreewiseModule {
    pub cap: i64,
    pub dims: GradedSpace,
    pub ops: Vec<GradedMap>,
}

impl DegreewiseModule {
    /// The free module on generators `gens` over a polynomial ring in `vars`
    /// variables, with the coordinate multiplication operators.
    pub fn free(vars: usize, gens: &[i64], cap: i64) -> Self {
        let mut dims = GradedSpace::new();
        let mut d = gens.iter().copied().min().unwrap_or(0);
        while d <= cap {
            dims.set_dim(d, free_dim(vars, gens, d));
            d += 2;
        }
        let mut ops = Vec::new();
        for v in 0..vars {
            let mut form = vec![Q::zero(); vars];
            form[v] = num::One::one();
            let mut op = GradedMap::new(2);
            let mut d = gens.iter().copied().min().unwrap_or(0);
            while d + 2 <= cap {
                op.insert_block(d, free_mult_matrix(vars, gens, d, &form));
                d += 2;
            }
            ops.push(op);
        }
        DegreewiseModule { cap, dims, ops }
    }

    /// Exact commutation of the operator tuple below the cap.
    pub fn operators_commute(&self) -> bool {
        for a in 0..self.ops.len() {
            for b in a + 1..self.ops.len() {
                let ab = self.ops[a].compose(&self.ops[b]);
                let ba = self.ops[b].compose(&self.ops[a]);
                for (&d, m) in &ab.blocks {
                    if d + 4 > self.cap {
                        continue;
                    }
                    match ba.block(d) {
                        Some(other) => {
                            if m != other {
                                return false;
                            }
                        }
                        None => {
                            if !m.is_zero() {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }
}

/// Dimension of the degree-`d` slice of a free module with generator degrees
/// `gens` over `vars` variables.
pub fn free_dim(vars: usize, gens: &[i64], d: i64) -> usize {
    gens.iter()
        .filter(|&&g| d >= g && (d - g) % 2 == 0)
        .map(|&g| monomial_count(vars, ((d - g) / 2) as usize))
        .sum()
}

/// Basis of the degree-`d` slice of the free module: pairs of generator index
/// and monomial, ordered by generator then grlex.
pub fn free_basis(vars: usize, gens: &[i64], d: i64) -> Vec<(usize, Vec<u32>)> {
    let mut out = Vec::new();
    for (k, &g) in gens.iter().enumerate() {
        if d >= g && (d - g) % 2 == 0 {
            for m in monomials(vars, ((d - g) / 2) as usize) {
                out.push((k, m));
            }
        }
    }
    out
}

/// Multiplication by a linear `form` on the free module, degree `d` to `d+2`.
pub fn free_mult_matrix(vars: usize, gens: &[i64], d: i64, form: &[Q]) -> Mat {
    let src = free_basis(vars, gens, d);
    let dst = free_basis(vars, gens, d + 2);
    let mut m = Mat::zeros(dst.len(), src.len());
    for (j, (k, e)) in src.iter().enumerate() {
        for (i, c) in form.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut f = e.clone();
            f[i] += 1;
            let r = dst
                .iter()
                .position(|(k2, e2)| k2 == k && e2 == &f)
                .expect("free module basis closed under multiplication");
            let cur = m.get(r, j).clone();
            m.set(r, j, cur + c);
        }
    }
    m
}

/// Per-degree image of the operator tuple: the columns of all operator blocks
/// out of degree `d - 2`, as a matrix into degree `d`.
fn operator_image(module: &DegreewiseModule, d: i64) -> Mat {
    let target = module.dims.dim(d);
    let mut stacked = Mat::zeros(target, 0);
    for op in &module.ops {
        if let Some(b) = op.block(d - 2) {
            if b.nrows() == target {
                stacked = stacked.hstack(b);
            }
        }
    }
    stacked
}

/// Generator degrees of the module: per degree, `dim M^d - dim (m . M)^d`.
/// `bound` guards the truncation: generators must provably lie at degrees
/// `< bound`, so the cap must reach `bound - 2`.
pub fn minimal_generators(
    module: &DegreewiseModule,
    bound: i64,
) -> Result<GradedSpace, LinalgError> {
    if module.cap < bound - 2 {
        return Err(LinalgError::CapTooLow {
            cap: module.cap,
            needed: bound - 2,
        });
    }
    Ok(minimal_generators_unchecked(module))
}

pub fn minimal_generators_unchecked(module: &DegreewiseModule) -> GradedSpace {
    let mut out = GradedSpace::new();
    for (d, dim) in module.dims.iter() {
        if d > module.cap {
            continue;
        }
        let image_rank = operator_image(module, d).rank();
        out.set_dim(d, dim - image_rank);
    }
    out
}

/// Indices of a deterministic basis of `M^d` complementary to `(m.M)^d`,
/// i.e. generator lifts in degree `d` (non-pivot coordinates of the image).
pub fn generator_lift_indices(module: &DegreewiseModule, d: i64) -> Vec<usize> {
    let img = operator_image(module, d);
    let dim = module.dims.dim(d);
    // Pivot ROWS of the column space: row-reduce the transpose.
    let (_, pivots) = img.transpose().rref();
    let pivot_rows: std::collections::BTreeSet<usize> = pivots.into_iter().collect();
    (0..dim).filter(|i| !pivot_rows.contains(i)).collect()
}

/// Hilbert-series freeness tripwire: over `k` variables, the truncated product
/// `Hilb(M) * (1 - t^2)^k` must equal the generator series with nonnegative
/// coefficients. Necessary, not sufficient.
pub fn hilbert_check_free(module: &DegreewiseModule, k: usize) -> bool {
    let cap = module.cap;
    let hilb = module.dims.coeffs_up_to(cap);
    // (1 - t^2)^k in the same truncation (t^2 is one slot).
    let slots = hilb.len();
    let mut factor = vec![0i64; slots];
    for j in 0..slots {
        if j <= k {
            factor[j] = binom(k as i64, j as i64) * if j % 2 == 0 { 1 } else { -1 };
        }
    }
    let mut product = vec![0i64; slots];
    for i in 0..slots {
        for j in 0..slots - i {
            product[i + j] += hilb[i] * factor[j];
        }
    }
    let gens = minimal_generators_unchecked(module);
    let gen_coeffs = gens.coeffs_up_to(cap);
    product == gen_coeffs && product.iter().all(|&c| c >= 0)
}

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

/// Constructive freeness certificate: lift the minimal generators and verify
/// that the induced map from the free module on them is bijective in every
/// degree up to the cap. Returns the generator degrees on success.
pub fn certify_free(module: &DegreewiseModule, vars: usize) -> Result<GradedSpace, LinalgError> {
    let gens_space = minimal_generators_unchecked(module);
    let mut gens: Vec<i64> = Vec::new();
    for (d, n) in gens_space.iter() {
        for _ in 0..n {
            gens.push(d);
        }
    }
    // Build lifts per generator degree.
    let mut lifts: Vec<(i64, Vec<Q>)> = Vec::new();
    for (d, _) in gens_space.iter() {
        let dim = module.dims.dim(d);
        for idx in generator_lift_indices(module, d) {
            let mut v = vec![Q::zero(); dim];
            v[idx] = num::One::one();
            lifts.push((d, v));
        }
    }
    // For each degree, map the free-module basis through the lifts and check
    // bijectivity.
    let mut d = gens.iter().copied().min().unwrap_or(0);
    while d <= module.cap {
        let expected = free_dim(vars, &gens, d);
        let actual = module.dims.dim(d);
        if expected != actual {
            return Err(LinalgError::NotFree {
                degree: d,
                expected,
                actual,
            });
        }
        if actual > 0 {
            let basis = free_basis(vars, &gens, d);
            let mut cols: Vec<Vec<Q>> = Vec::with_capacity(basis.len());
            for (k, e) in &basis {
                let (g_deg, lift) = &lifts[*k];
                let mut v = lift.clone();
                let mut cur_deg = *g_deg;
                // apply the monomial one variable at a time
                for (var, &p) in e.iter().enumerate() {
                    for _ in 0..p {
                        let op = module.ops[var]
                            .block(cur_deg)
                            .expect("operator block missing below cap");
                        v = op.mul_vec(&v);
                        cur_deg += 2;
                    }
                }
                debug_assert_eq!(cur_deg, d);
                cols.push(v);
            }
            let m = Mat::from_cols(cols);
            if m.rank() != actual {
                return Err(LinalgError::NotFree {
                    degree: d,
                    expected,
                    actual: m.rank(),
                });
            }
        }
        d += 2;
    }
    if !hilbert_check_free(module, vars) {
        return Err(LinalgError::HilbertMismatch);
    }
    Ok(gens_space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::qvec;

    #[test]
    fn monomial_bases() {
        assert_eq!(monomials(2, 2).len(), 3);
        assert_eq!(monomials(3, 0), vec![vec![0, 0, 0]]);
        assert_eq!(monomials(0, 0), vec![Vec::<u32>::new()]);
        assert_eq!(monomial_count(4, 4), 35);
        for (v, d) in [(1, 5), (2, 3), (3, 4), (4, 2)] {
            assert_eq!(monomials(v, d).len(), monomial_count(v, d));
        }
    }

    #[test]
    fn generators_of_free_modules() {
        // The ring itself over two variables.
        let m = DegreewiseModule::free(2, &[0], 8);
        assert!(m.operators_commute());
        let g = minimal_generators(&m, 2).unwrap();
        assert_eq!(g, GradedSpace::from_pairs(&[(0, 1)]));
        // A + A(-2)
        let m2 = DegreewiseModule::free(2, &[0, 2], 8);
        let g2 = minimal_generators(&m2, 4).unwrap();
        assert_eq!(g2, GradedSpace::from_pairs(&[(0, 1), (2, 1)]));
        assert!(hilbert_check_free(&m2, 2));
        assert_eq!(certify_free(&m2, 2).unwrap(), g2);
    }

    #[test]
    fn non_free_module_detected() {
        // A/(x) viewed over one variable: one dimension in degree 0, nothing
        // above, with the zero operator.
        let mut dims = GradedSpace::new();
        dims.set_dim(0, 1);
        let mut op = GradedMap::new(2);
        op.insert_block(0, Mat::zeros(0, 1));
        let m = DegreewiseModule {
            cap: 4,
            dims,
            ops: vec![op],
        };
        assert!(!hilbert_check_free(&m, 1));
        assert!(certify_free(&m, 1).is_err());
    }

    #[test]
    fn substitution_matrix_restricts() {
        // Restrict polynomials in (x, y) to the line x = t, y = 2t.
        let cols = vec![qvec(&[1]), qvec(&[2])];
        let m = substitution_matrix(2, 1, &cols, 2);
        // x^2, xy, y^2 -> t^2, 2t^2, 4t^2
        assert_eq!(m.nrows(), 1);
        assert_eq!(m.ncols(), 3);
        assert_eq!(m.row(0), &qvec(&[1, 2, 4])[..]);
    }

    #[test]
    fn cap_guard() {
        let m = DegreewiseModule::free(2, &[0], 2);
        assert!(matches!(
            minimal_generators(&m, 6),
            Err(LinalgError::CapTooLow { .. })
        ));
    }
}
