//! Graded vector spaces, degree-homogeneous maps and symmetric pairings.
//!
//! All gradings are even: linear functions sit in degree 2.

use crate::linalg::mat::Mat;
use serde::Serialize;
use std::collections::BTreeMap;

use super::LinalgError;

/// Dimension per (even) degree. Degrees with dimension zero are omitted.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct GradedSpace {
    dims: BTreeMap<i64, usize>,
}

impl std::fmt::Debug for GradedSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|(d, n)| format!("{d}:{n}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl GradedSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(i64, usize)]) -> Self {
        let mut s = Self::new();
        for &(d, n) in pairs {
            s.set_dim(d, n);
        }
        s
    }

    pub fn set_dim(&mut self, degree: i64, dim: usize) {
        assert!(degree % 2 == 0, "odd degree {degree} in graded space");
        if dim == 0 {
            self.dims.remove(&degree);
        } else {
            self.dims.insert(degree, dim);
        }
    }

    pub fn dim(&self, degree: i64) -> usize {
        self.dims.get(&degree).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.dims.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, usize)> + '_ {
        self.dims.iter().map(|(&d, &n)| (d, n))
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.dims.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.dims.keys().next_back().copied()
    }

    /// Shifts the grading: degree d of the result is degree d + j of self.
    pub fn shifted(&self, j: i64) -> GradedSpace {
        GradedSpace {
            dims: self.dims.iter().map(|(&d, &n)| (d - j, n)).collect(),
        }
    }

    /// Hilbert-style coefficient vector on `[0, cap]`, step 2.
    pub fn coeffs_up_to(&self, cap: i64) -> Vec<i64> {
        let mut out = Vec::new();
        let mut d = 0;
        while d <= cap {
            out.push(self.dim(d) as i64);
            d += 2;
        }
        out
    }

    /// Graded tensor-product dimensions (convolution), truncated at `cap`.
    pub fn convolve(&self, other: &GradedSpace, cap: i64) -> GradedSpace {
        let mut out = GradedSpace::new();
        for (d1, n1) in self.iter() {
            for (d2, n2) in other.iter() {
                let d = d1 + d2;
                if d <= cap {
                    out.set_dim(d, out.dim(d) + n1 * n2);
                }
            }
        }
        out
    }

    /// Rendered as `"0:1 2:2 4:1"`.
    pub fn display_compact(&self) -> String {
        let parts: Vec<String> = self.dims.iter().map(|(d, n)| format!("{d}:{n}")).collect();
        parts.join(" ")
    }
}

impl Serialize for GradedSpace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<String, usize> =
            self.dims.iter().map(|(d, n)| (d.to_string(), *n)).collect();
        map.serialize(serializer)
    }
}

/// A degree-homogeneous linear map between graded spaces, stored as one
/// matrix block per source degree. `shift` is the degree it adds.
#[derive(Clone, Debug)]
pub struct GradedMap {
    pub shift: i64,
    pub blocks: BTreeMap<i64, Mat>,
}

impl GradedMap {
    pub fn new(shift: i64) -> Self {
        GradedMap {
            shift,
            blocks: BTreeMap::new(),
        }
    }

    pub fn block(&self, source_degree: i64) -> Option<&Mat> {
        self.blocks.get(&source_degree)
    }

    pub fn insert_block(&mut self, source_degree: i64, m: Mat) {
        self.blocks.insert(source_degree, m);
    }

    /// `other` then `self`; shifts add.
    pub fn compose(&self, other: &GradedMap) -> GradedMap {
        let mut out = GradedMap::new(self.shift + other.shift);
        for (&d, first) in &other.blocks {
            if let Some(second) = self.blocks.get(&(d + other.shift)) {
                out.insert_block(d, second.mul(first));
            }
        }
        out
    }

    /// Iterated composition with itself (`power >= 1`). Missing target blocks
    /// truncate the composition, which is correct for capped modules.
    pub fn pow(&self, power: u32) -> GradedMap {
        assert!(power >= 1);
        let mut out = self.clone();
        for _ in 1..power {
            out = self.compose(&out);
        }
        out
    }

    pub fn rank(&self, source_degree: i64) -> usize {
        self.block(source_degree).map(|m| m.rank()).unwrap_or(0)
    }

    pub fn per_degree_ranks(&self) -> BTreeMap<i64, usize> {
        self.blocks.iter().map(|(&d, m)| (d, m.rank())).collect()
    }

    pub fn kernel(&self, source_degree: i64) -> Option<Mat> {
        self.block(source_degree).map(|m| m.kernel_basis())
    }
}

/// A graded pairing between complementary degrees: the block at degree `d`
/// pairs the left space in degree `total - d` with the right space in
/// degree `d` (rows index the left side).
#[derive(Clone, Debug)]
pub struct SymmetricForm {
    pub total: i64,
    pub blocks: BTreeMap<i64, Mat>,
}

impl SymmetricForm {
    pub fn new(total: i64) -> Self {
        SymmetricForm {
            total,
            blocks: BTreeMap::new(),
        }
    }

    pub fn block(&self, right_degree: i64) -> Option<&Mat> {
        self.blocks.get(&right_degree)
    }

    /// Inertia `(pos, neg, zero)` of the middle-degree block, which must be
    /// square and symmetric.
    pub fn signature(&self, degree: i64) -> Result<(usize, usize, usize), LinalgError> {
        assert_eq!(2 * degree, self.total, "signature away from the middle degree");
        let Some(b) = self.block(degree) else {
            return Ok((0, 0, 0));
        };
        if !b.is_symmetric() {
            return Err(LinalgError::NotSymmetric);
        }
        Ok(b.inertia())
    }

    /// Blocks paired across the center must be mutual transposes.
    pub fn is_transpose_symmetric(&self) -> bool {
        for (&d, m) in &self.blocks {
            let opposite = self.total - d;
            match self.blocks.get(&opposite) {
                Some(other) => {
                    if &m.transpose() != other {
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
        true
    }
}

/// Degree-tagged dense rational matrix dump, row-major `"p/q"` entries.
pub fn dump_blocks_json(blocks: &BTreeMap<i64, Mat>) -> serde_json::Value {
    let mut out = serde_json::Map::new();
    for (d, m) in blocks {
        let rows: Vec<Vec<String>> = (0..m.nrows())
            .map(|r| m.row(r).iter().map(crate::rat::fmt_q).collect())
            .collect();
        out.insert(d.to_string(), serde_json::json!(rows));
    }
    serde_json::Value::Object(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::qvec;

    #[test]
    fn compose_shifts_add() {
        let mut a = GradedMap::new(2);
        a.insert_block(0, Mat::from_rows(vec![qvec(&[1]), qvec(&[0])]));
        let mut b = GradedMap::new(2);
        b.insert_block(2, Mat::from_rows(vec![qvec(&[1, 1])]));
        let c = b.compose(&a);
        assert_eq!(c.shift, 4);
        assert_eq!(c.block(0).unwrap().nrows(), 1);
        assert_eq!(c.rank(0), 1);
    }

    #[test]
    fn convolution() {
        let a = GradedSpace::from_pairs(&[(0, 1), (2, 2), (4, 1)]);
        let b = GradedSpace::from_pairs(&[(0, 1), (2, 1)]);
        let c = a.convolve(&b, 10);
        assert_eq!(c.dim(2), 3);
        assert_eq!(c.dim(4), 3);
        assert_eq!(c.dim(6), 1);
    }
}
