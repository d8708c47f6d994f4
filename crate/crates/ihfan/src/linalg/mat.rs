//! Dense exact-rational matrices: reduction, rank, kernels, solving, inertia.
//!
//! Every routine uses a fixed deterministic pivot rule (first nonzero entry in
//! column order, topmost row), so bases chosen downstream are reproducible
//! bit-for-bit.

use crate::rat::Q;
use num::{One, Signed, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| crate::rat::fmt_q(self.get(r, c)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn from_cols(cols: Vec<Vec<Q>>) -> Self {
        let c = cols.len();
        let r = cols.first().map(|x| x.len()).unwrap_or(0);
        let mut m = Mat::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &Q {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Q] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c).clone();
                    out.set(r, c, cur + a * b);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|r| crate::rat::dot(self.row(r), v)).collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut out = Mat::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        out
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in r + 1..self.cols {
                if self.get(r, c) != self.get(c, r) {
                    return false;
                }
            }
        }
        true
    }

    /// Reduced row echelon form; returns the pivot column list.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = Q::one() / m.get(row, col).clone();
            for c in col..m.cols {
                let v = m.get(row, c).clone() * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let f = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = m.get(r, c).clone() - &f * m.get(row, c);
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, one column per free variable, in column order,
    /// with a `1` at the free coordinate.
    pub fn kernel_basis(&self) -> Mat {
        let (r, pivots) = self.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut out = Mat::zeros(self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, Q::one());
            for (prow, &pc) in pivots.iter().enumerate() {
                out.set(pc, k, -r.get(prow, fc).clone());
            }
        }
        out
    }

    /// Solves `self * X = rhs` column by column. Free variables are set to
    /// zero. `None` if any column is inconsistent.
    pub fn solve(&self, rhs: &Mat) -> Option<Mat> {
        assert_eq!(self.rows, rhs.rows);
        let aug = self.hstack(rhs);
        let (r, pivots) = aug.rref();
        // Any pivot in the rhs block means inconsistency.
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Mat::zeros(self.cols, rhs.cols);
        for (prow, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.set(pc, j, r.get(prow, self.cols + j).clone());
            }
        }
        Some(x)
    }

    pub fn solve_vec(&self, rhs: &[Q]) -> Option<Vec<Q>> {
        let rhs_m = Mat::from_cols(vec![rhs.to_vec()]);
        self.solve(&rhs_m).map(|x| x.col(0))
    }

    pub fn inverse(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve(&Mat::identity(self.rows))?;
        if self.mul(&x) == Mat::identity(self.rows) {
            Some(x)
        } else {
            None
        }
    }

    /// Determinant by fraction-free-ish Gaussian elimination.
    pub fn det(&self) -> Q {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Q::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return Q::zero();
            };
            if p != col {
                for c in 0..n {
                    m.data.swap(p * n + c, col * n + c);
                }
                det = -det;
            }
            let piv = m.get(col, col).clone();
            det *= &piv;
            for r in col + 1..n {
                if m.get(r, col).is_zero() {
                    continue;
                }
                let f = m.get(r, col).clone() / &piv;
                for c in col..n {
                    let v = m.get(r, c).clone() - &f * m.get(col, c);
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    /// Inertia `(positive, negative, zero)` of a symmetric matrix, by exact
    /// symmetric congruence reduction. Caller must ensure symmetry.
    pub fn inertia(&self) -> (usize, usize, usize) {
        assert!(self.is_symmetric(), "inertia of a non-symmetric matrix");
        let n = self.rows;
        let mut m = self.clone();
        let (mut pos, mut neg) = (0usize, 0usize);
        let mut k = 0;
        while k < n {
            // Prefer a nonzero diagonal pivot; otherwise manufacture one by a
            // symmetric row/column addition (char 0, so 2*a_ij != 0).
            let diag = (k..n).find(|&i| !m.get(i, i).is_zero());
            let i = match diag {
                Some(i) => i,
                None => {
                    let mut found = None;
                    'outer: for i in k..n {
                        for j in i + 1..n {
                            if !m.get(i, j).is_zero() {
                                found = Some((i, j));
                                break 'outer;
                            }
                        }
                    }
                    let Some((i, j)) = found else {
                        break; // all-zero tail
                    };
                    // row_i += row_j; col_i += col_j
                    for c in 0..n {
                        let v = m.get(i, c).clone() + m.get(j, c);
                        m.set(i, c, v);
                    }
                    for r in 0..n {
                        let v = m.get(r, i).clone() + m.get(r, j);
                        m.set(r, i, v);
                    }
                    i
                }
            };
            if i != k {
                // symmetric swap into position k
                for c in 0..n {
                    m.data.swap(i * n + c, k * n + c);
                }
                for r in 0..n {
                    m.data.swap(r * n + i, r * n + k);
                }
            }
            let piv = m.get(k, k).clone();
            if piv.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            for r in k + 1..n {
                if m.get(r, k).is_zero() {
                    continue;
                }
                let f = m.get(r, k).clone() / &piv;
                for c in 0..n {
                    let v = m.get(r, c).clone() - &f * m.get(k, c);
                    m.set(r, c, v);
                }
                for c in 0..n {
                    let v = m.get(c, r).clone() - &f * m.get(c, k);
                    m.set(c, r, v);
                }
            }
            k += 1;
        }
        (pos, neg, n - pos - neg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qvec};

    fn m(rows: &[&[i64]]) -> Mat {
        Mat::from_rows(rows.iter().map(|r| qvec(r)).collect())
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.kernel_basis();
        assert_eq!(k.ncols(), 1);
        assert!(a.mul(&k).is_zero());
    }

    #[test]
    fn solve_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let x = a.solve_vec(&qvec(&[3, 2])).unwrap();
        assert_eq!(x, qvec(&[1, 1]));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(2));
        let sing = m(&[&[1, 2], &[2, 4]]);
        assert!(sing.inverse().is_none());
        assert!(sing.solve_vec(&qvec(&[1, 0])).is_none());
    }

    #[test]
    fn determinant() {
        assert_eq!(m(&[&[2, 0], &[0, 3]]).det(), q(6));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det(), q(-1));
        assert_eq!(m(&[&[1, 2], &[2, 4]]).det(), q(0));
    }

    #[test]
    fn inertia_small_cases() {
        assert_eq!(m(&[&[1]]).inertia(), (1, 0, 0));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).inertia(), (1, 1, 0));
        assert_eq!(m(&[&[-2]]).inertia(), (0, 1, 0));
        assert_eq!(m(&[&[0, 0], &[0, 0]]).inertia(), (0, 0, 2));
        assert_eq!(m(&[&[1, 0, 0], &[0, -1, 0], &[0, 0, 0]]).inertia(), (1, 1, 1));
    }
}
