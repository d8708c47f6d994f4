//! The verifier implementations.

use super::report::{CheckReport, DegreeRow, Hypotheses};
use super::LefschetzError;
use crate::fan::{
    check_convexity, check_relative_convexity, classify_support, ConeId, Fan, PiecewiseLinear,
    SubdivisionMap, SupportClass,
};
use crate::linalg::graded::GradedMap;
use crate::linalg::mat::Mat;
use crate::pairing::{fiber_block, star_reduction, whole_fan_block, FiberBlock, IhContext};
use crate::rat::Q;
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A graded space with a degree-2 operator, a symmetric center, and
/// optionally the pairing between complementary degrees.
struct LefSpace {
    center: i64,
    dims: BTreeMap<i64, usize>,
    op: GradedMap,
    /// blocks[d]: rows index degree `2*center - d`, columns degree `d`.
    pairing: Option<BTreeMap<i64, Mat>>,
}

impl LefSpace {
    fn dim(&self, d: i64) -> usize {
        self.dims.get(&d).copied().unwrap_or(0)
    }

    fn check_even(&self) -> Result<(), LefschetzError> {
        for (&d, &k) in &self.dims {
            if k > 0 && d % 2 != 0 {
                return Err(LefschetzError::OddDegree(format!(
                    "dimension {k} in odd degree {d}"
                )));
            }
        }
        Ok(())
    }

    /// The i-th power of the operator out of degree `d`, with explicit zero
    /// blocks where the graded space vanishes.
    fn power_block(&self, power: u32, d: i64) -> Mat {
        let mut cur = Mat::identity(self.dim(d));
        let mut deg = d;
        for _ in 0..power {
            let rows = self.dim(deg + 2);
            let block = self
                .op
                .block(deg)
                .cloned()
                .unwrap_or_else(|| Mat::zeros(rows, self.dim(deg)));
            cur = block.mul(&cur);
            deg += 2;
        }
        cur
    }

    /// Lefschetz rows: the i-th power must be a bijection between the degrees
    /// symmetric about the center, for every positive i.
    fn hl_rows(&self, label: &str, report: &mut CheckReport) {
        let c = self.center;
        let top: i64 = self.dims.keys().next_back().copied().unwrap_or(c);
        let reach = (top - c).max(c - self.dims.keys().next().copied().unwrap_or(c));
        for i in 1..=reach.max(0) {
            let (lo, hi) = (c - i, c + i);
            let (dl, dh) = (self.dim(lo), self.dim(hi));
            if dl == 0 && dh == 0 {
                continue;
            }
            let rank = self.power_block(i as u32, lo).rank();
            let mut row = DegreeRow::rank_row(
                format!("{label}power {i}: degree {lo} -> {hi}"),
                rank,
                dl.max(dh),
            );
            row.pass = dl == dh && rank == dl;
            report.push(row);
        }
    }

    /// Quadratic form on degree `c - i`: pair the i-th power image with the
    /// untouched side.
    fn q_matrix(&self, i: i64) -> Result<Mat, LefschetzError> {
        let c = self.center;
        let pairing = self
            .pairing
            .as_ref()
            .ok_or_else(|| LefschetzError::Internal("pairing data missing".into()))?;
        let d = c - i;
        let p = pairing
            .get(&d)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.dim(c + i), self.dim(d)));
        let power = self.power_block(i as u32, d);
        Ok(power.transpose().mul(&p))
    }

    /// Hodge-Riemann rows: the signed form must be positive definite on the
    /// primitive part in every degree at or below the center, and the
    /// inertia of the full form must match the alternating-sum formula.
    fn hr_rows(&self, label: &str, report: &mut CheckReport) -> Result<(), LefschetzError> {
        let c = self.center;
        let mut i = if c % 2 == 0 { 0 } else { 1 };
        while c - i >= self.dims.keys().next().copied().unwrap_or(c) {
            let d = c - i;
            if self.dim(d) == 0 {
                i += 2;
                continue;
            }
            let q = self.q_matrix(i)?;
            if !q.is_symmetric() {
                return Err(LefschetzError::PairingDegenerate(format!(
                    "form at degree {d} is not symmetric"
                )));
            }
            // Primitive part: kernel of the next power.
            let prim = self.power_block(i as u32 + 1, d).kernel_basis();
            let qp = prim.transpose().mul(&q.mul(&prim));
            let sign_exp = (c - i) / 2;
            let signed = if sign_exp.rem_euclid(2) == 0 {
                qp.clone()
            } else {
                qp.scale(&-Q::one())
            };
            let inertia = signed.inertia();
            let want = prim.ncols();
            let mut row = DegreeRow {
                label: format!("{label}signed form on primitive part, degree {d}"),
                rank: inertia.0,
                required: want,
                inertia: Some(inertia),
                expected: format!("positive definite of dimension {want}"),
                pass: inertia == (want, 0, 0),
            };
            if (c - i) % 2 != 0 {
                row.pass = false;
                row.expected = "even degree".into();
            }
            report.push(row);
            // Aggregate inertia of the full form against the alternating sum.
            let full_inertia = q.inertia();
            let mut expected_sig = 0i64;
            let mut j = d % 2;
            while j < d {
                let s = if (j / 2).rem_euclid(2) == 0 { 1 } else { -1 };
                expected_sig += 2 * s * self.dim(j) as i64;
                j += 2;
            }
            let s = if (d / 2).rem_euclid(2) == 0 { 1 } else { -1 };
            expected_sig += s * self.dim(d) as i64;
            let got_sig = full_inertia.0 as i64 - full_inertia.1 as i64;
            report.push(DegreeRow {
                label: format!("{label}signature of the full form, degree {d}"),
                rank: full_inertia.0 + full_inertia.1,
                required: self.dim(d),
                inertia: Some(full_inertia),
                expected: format!("nondegenerate with signature {expected_sig}"),
                pass: full_inertia.2 == 0 && got_sig == expected_sig,
            });
            i += 2;
        }
        Ok(())
    }
}

fn space_of_block(block: &FiberBlock, with_pairing: bool) -> Result<LefSpace, LefschetzError> {
    let op = block.ctx.action_on_w(&block.function)?;
    let pairing = if with_pairing {
        let mut blocks = BTreeMap::new();
        for (&d, _) in &block.ctx.w_dims {
            blocks.insert(d, block.ctx.w_pairing_block(d)?);
        }
        Some(blocks)
    } else {
        None
    };
    let space = LefSpace {
        center: block.center,
        dims: block.ctx.w_dims.clone(),
        op,
        pairing,
    };
    space.check_even()?;
    Ok(space)
}

fn certify_strict(
    fan: &Fan,
    l: &PiecewiseLinear,
    mode: Hypotheses,
    report: &mut CheckReport,
) -> Result<(), LefschetzError> {
    let conv = check_convexity(l, fan)?;
    report.hypothesis(format!(
        "strictly convex: {}",
        if conv.strictly_convex { "yes" } else { "NO" }
    ));
    if !conv.strictly_convex {
        match mode {
            Hypotheses::Enforce => return Err(LefschetzError::NotStrictlyConvex),
            Hypotheses::RecordOnly => {}
        }
    }
    Ok(())
}

/// Reduces a complete fan and function at a cone: identity at the minimal
/// cone, transverse star quotient otherwise.
fn reduce_at(
    fan: &Arc<Fan>,
    l: &PiecewiseLinear,
    tau: Option<ConeId>,
) -> Result<(Arc<Fan>, PiecewiseLinear), LefschetzError> {
    match tau {
        None => Ok((fan.clone(), l.clone())),
        Some(t) if t == fan.minimal_cone() => Ok((fan.clone(), l.clone())),
        Some(t) => {
            let (f, g) = star_reduction(fan, t, l)?;
            Ok((f, g))
        }
    }
}

/// Hard Lefschetz at a cone of a complete fan: powers of the strictly convex
/// function are bijections between the degrees symmetric about the
/// codimension.
pub fn check_hl(
    fan: &Arc<Fan>,
    l: &PiecewiseLinear,
    tau: Option<ConeId>,
    mode: Hypotheses,
) -> Result<CheckReport, LefschetzError> {
    let mut report = CheckReport::new("hard-lefschetz");
    if classify_support(fan)? != SupportClass::Complete {
        return Err(LefschetzError::NotComplete);
    }
    report.hypothesis("fan: complete");
    let (rfan, rl) = reduce_at(fan, l, tau)?;
    if let Some(t) = tau {
        report.hypothesis(format!("at cone c{t}, transverse dimension {}", rfan.ambient_dim()));
    }
    certify_strict(&rfan, &rl, mode, &mut report)?;
    let block = whole_fan_block(rfan, &rl)?;
    let space = space_of_block(&block, false)?;
    space.hl_rows("", &mut report);
    Ok(report)
}

/// Hodge-Riemann at a cone of a complete fan.
pub fn check_hr(
    fan: &Arc<Fan>,
    l: &PiecewiseLinear,
    tau: Option<ConeId>,
    mode: Hypotheses,
) -> Result<CheckReport, LefschetzError> {
    let mut report = CheckReport::new("hodge-riemann");
    if classify_support(fan)? != SupportClass::Complete {
        return Err(LefschetzError::NotComplete);
    }
    report.hypothesis("fan: complete");
    let (rfan, rl) = reduce_at(fan, l, tau)?;
    if let Some(t) = tau {
        report.hypothesis(format!("at cone c{t}, transverse dimension {}", rfan.ambient_dim()));
    }
    certify_strict(&rfan, &rl, mode, &mut report)?;
    let block = whole_fan_block(rfan, &rl)?;
    let space = space_of_block(&block, true)?;
    space.hr_rows("", &mut report)?;
    space.hl_rows("", &mut report);
    Ok(report)
}

/// Which extension sheaf is pushed down the subdivision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GSpec {
    /// The intersection cohomology sheaf of the source fan.
    Full,
    /// The extension sheaf starting at a source cone.
    At(ConeId),
}

impl GSpec {
    fn source_cone(&self, source: &Fan) -> ConeId {
        match self {
            GSpec::Full => source.minimal_cone(),
            GSpec::At(t) => *t,
        }
    }
}

fn certify_relative(
    map: &SubdivisionMap,
    lhat: &PiecewiseLinear,
    mode: Hypotheses,
    report: &mut CheckReport,
) -> Result<(), LefschetzError> {
    let conv = check_relative_convexity(lhat, map)?;
    report.hypothesis(format!(
        "relatively strictly convex: {}",
        if conv.strictly_convex { "yes" } else { "NO" }
    ));
    if !conv.strictly_convex {
        match mode {
            Hypotheses::Enforce => return Err(LefschetzError::NotRelativelyConvex),
            Hypotheses::RecordOnly => {}
        }
    }
    Ok(())
}

/// Relative hard Lefschetz: the relatively strictly convex function acts as a
/// Lefschetz operator on every multiplicity space of the pushforward.
pub fn check_rhl(
    map: &SubdivisionMap,
    g: GSpec,
    lhat: &PiecewiseLinear,
    mode: Hypotheses,
) -> Result<CheckReport, LefschetzError> {
    let mut report = CheckReport::new("relative-hard-lefschetz");
    certify_relative(map, lhat, mode, &mut report)?;
    relative_rows(map, g, lhat, false, &mut report)?;
    Ok(report)
}

/// Relative Hodge-Riemann: signed definiteness on the primitive parts of
/// every multiplicity space.
pub fn check_rhr(
    map: &SubdivisionMap,
    g: GSpec,
    lhat: &PiecewiseLinear,
    mode: Hypotheses,
) -> Result<CheckReport, LefschetzError> {
    let mut report = CheckReport::new("relative-hodge-riemann");
    certify_relative(map, lhat, mode, &mut report)?;
    relative_rows(map, g, lhat, true, &mut report)?;
    Ok(report)
}

fn relative_rows(
    map: &SubdivisionMap,
    g: GSpec,
    lhat: &PiecewiseLinear,
    with_pairing: bool,
    report: &mut CheckReport,
) -> Result<(), LefschetzError> {
    let source_cone = g.source_cone(&map.source);
    let cones: Vec<ConeId> = (0..map.target.cone_count()).collect();
    for sigma in cones {
        let Some(block) = fiber_block(map, sigma, source_cone, lhat)? else {
            continue;
        };
        if block.ctx.w_dims.is_empty() {
            continue;
        }
        let space = space_of_block(&block, with_pairing)?;
        let label = format!("cone c{sigma}: ");
        if with_pairing {
            space.hr_rows(&label, report)?;
        }
        space.hl_rows(&label, report);
    }
    Ok(())
}

/// The convex-fan theorem: on a convex fan, a strictly convex function is a
/// Lefschetz operator on the image of the boundary-vanishing cohomology, with
/// the Hodge-Riemann signs on its primitive parts.
pub fn check_convex_theorem(
    fan: &Arc<Fan>,
    lhat: &PiecewiseLinear,
    tau: Option<ConeId>,
    mode: Hypotheses,
) -> Result<CheckReport, LefschetzError> {
    let mut report = CheckReport::new("convex-fan");
    if classify_support(fan)? != SupportClass::Convex {
        return Err(LefschetzError::NotConvex);
    }
    report.hypothesis("fan: convex with boundary");
    let (rfan, rl) = reduce_at(fan, lhat, tau)?;
    certify_strict(&rfan, &rl, mode, &mut report)?;
    let block = whole_fan_block(rfan, &rl)?;
    let space = space_of_block(&block, true)?;
    space.hr_rows("", &mut report)?;
    space.hl_rows("", &mut report);
    Ok(report)
}

/// Data of the image filtration on a complete fan: the image of the convex
/// function acting on the cohomology, the restricted operator of the second
/// function, and the induced quadratic form.
struct ImageSpace {
    center: i64,
    dims: BTreeMap<i64, usize>,
    /// Per degree d: image basis columns in IH^d coordinates.
    bases: BTreeMap<i64, Mat>,
    /// Per degree d: IH^{d-2}-coordinates of preimages of the basis columns.
    preimages: BTreeMap<i64, Mat>,
    /// restricted operator of the second function
    op: GradedMap,
}

fn image_space(
    ctx: &IhContext,
    a_l: &GradedMap,
    a_second: &GradedMap,
    cap: i64,
) -> Result<ImageSpace, LefschetzError> {
    let n = ctx.base.ambient_dim() as i64;
    let mut bases = BTreeMap::new();
    let mut preimages = BTreeMap::new();
    let mut dims = BTreeMap::new();
    let mut d = 0;
    while d <= cap {
        let block = a_l
            .block(d - 2)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(ctx.ih_dims().dim(d), ctx.ih_dims().dim(d - 2)));
        let (_, pivots) = block.rref();
        let basis = Mat::from_cols_or_zeros(
            pivots.iter().map(|&c| block.col(c)).collect(),
            ctx.ih_dims().dim(d),
        );
        let mut pre = Mat::zeros(ctx.ih_dims().dim(d - 2), pivots.len());
        for (k, &c) in pivots.iter().enumerate() {
            pre.set(c, k, Q::one());
        }
        dims.insert(d, basis.ncols());
        bases.insert(d, basis);
        preimages.insert(d, pre);
        d += 2;
    }
    // Restrict the second operator to the image spaces.
    let mut op = GradedMap::new(2);
    let mut d = 0;
    while d + 2 <= cap {
        let src = &bases[&d];
        let dst = &bases[&(d + 2)];
        let block = a_second
            .block(d)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(ctx.ih_dims().dim(d + 2), ctx.ih_dims().dim(d)));
        let image = block.mul(src);
        let sol = dst
            .solve(&image)
            .filter(|s| &dst.mul(s) == &image)
            .ok_or_else(|| {
                LefschetzError::Internal("operator does not preserve the image filtration".into())
            })?;
        op.insert_block(d, sol);
        d += 2;
    }
    Ok(ImageSpace {
        center: n + 1,
        dims,
        bases,
        preimages,
        op,
    })
}

trait MatColsOrZeros {
    fn from_cols_or_zeros(cols: Vec<Vec<Q>>, rows: usize) -> Mat;
}

impl MatColsOrZeros for Mat {
    fn from_cols_or_zeros(cols: Vec<Vec<Q>>, rows: usize) -> Mat {
        if cols.is_empty() {
            Mat::zeros(rows, 0)
        } else {
            Mat::from_cols(cols)
        }
    }
}

impl ImageSpace {
    fn dim(&self, d: i64) -> usize {
        self.dims.get(&d).copied().unwrap_or(0)
    }

    fn power_block(&self, power: u32, d: i64) -> Mat {
        let mut cur = Mat::identity(self.dim(d));
        let mut deg = d;
        for _ in 0..power {
            let rows = self.dim(deg + 2);
            let block = self
                .op
                .block(deg)
                .cloned()
                .unwrap_or_else(|| Mat::zeros(rows, self.dim(deg)));
            cur = block.mul(&cur);
            deg += 2;
        }
        cur
    }

    /// Rows for the image-filtration theorem on a context whose pairing is
    /// available: Lefschetz between `l.IH^{n-i+2}` and `l.IH^{n+i}`, and
    /// signed definiteness of `Q(lh) = <second^{i-1} l h, h>`.
    fn rows(
        &self,
        ctx: &IhContext,
        label: &str,
        with_pairing: bool,
        report: &mut CheckReport,
    ) -> Result<(), LefschetzError> {
        let n = self.center - 1;
        // part 1: bijectivity of power i-1 from degree n-i+2 to n+i
        let top = self.dims.keys().next_back().copied().unwrap_or(n);
        let mut i = 2;
        while n + i <= top + 2 {
            let (lo, hi) = (n - i + 2, n + i);
            let (dl, dh) = (self.dim(lo), self.dim(hi));
            if dl == 0 && dh == 0 {
                i += 2;
                continue;
            }
            let rank = self.power_block((i - 1) as u32, lo).rank();
            let mut row = DegreeRow::rank_row(
                format!("{label}image power {}: degree {lo} -> {hi}", i - 1),
                rank,
                dl.max(dh),
            );
            row.pass = dl == dh && rank == dl;
            report.push(row);
            i += 2;
        }
        if !with_pairing {
            return Ok(());
        }
        // part 2: signed definiteness on the primitive parts
        let mut i = if n % 2 == 0 { 2 } else { 1 };
        while n - i + 2 >= 0 {
            let d = n - i + 2;
            if self.dim(d) == 0 {
                i += 2;
                continue;
            }
            // Q[a][b] = <second^{i-1} (l h_a), h_b>
            let power = self.power_block((i - 1) as u32, d);
            let img_coords = self.bases[&(n + i)].mul(&power);
            let pre = &self.preimages[&d];
            let rows_n = self.dim(d);
            let mut q = Mat::zeros(rows_n, rows_n);
            for a in 0..rows_n {
                for b in 0..rows_n {
                    let x = img_coords.col(a);
                    let h = pre.col(b);
                    let v = ctx
                        .pair(n + i, &x, n - i, &h)
                        .map_err(LefschetzError::Pairing)?;
                    q.set(a, b, v);
                }
            }
            if !q.is_symmetric() {
                return Err(LefschetzError::PairingDegenerate(format!(
                    "image form at degree {d} is not symmetric"
                )));
            }
            let prim = self.power_block(i as u32, d).kernel_basis();
            let qp = prim.transpose().mul(&q.mul(&prim));
            let sign_exp = (n - i) / 2;
            let signed = if sign_exp.rem_euclid(2) == 0 {
                qp.clone()
            } else {
                qp.scale(&-Q::one())
            };
            let inertia = signed.inertia();
            let want = prim.ncols();
            let mut row = DegreeRow {
                label: format!("{label}signed image form on primitive part, degree {d}"),
                rank: inertia.0,
                required: want,
                inertia: Some(inertia),
                expected: format!("positive definite of dimension {want}"),
                pass: inertia == (want, 0, 0),
            };
            if (n - i) % 2 != 0 {
                row.pass = false;
                row.expected = "even degree".into();
            }
            report.push(row);
            i += 2;
        }
        Ok(())
    }
}

/// Groups the maximal cones of a complete fan by the linear form of a convex
/// function and builds the coarser fan on which it is strictly convex.
fn linearity_fan(
    fan: &Arc<Fan>,
    l: &PiecewiseLinear,
) -> Result<(Arc<Fan>, PiecewiseLinear, SubdivisionMap), LefschetzError> {
    let mut groups: BTreeMap<Vec<Q>, Vec<ConeId>> = BTreeMap::new();
    for (idx, &mc) in fan.max_cones().iter().enumerate() {
        groups.entry(l.forms[idx].clone()).or_default().push(mc);
    }
    let mut hull_lineality: Option<Vec<Vec<Q>>> = None;
    let mut hull_rays: Vec<Vec<Q>> = Vec::new();
    let mut hull_cones: Vec<Vec<usize>> = Vec::new();
    let mut hull_forms: Vec<Vec<Q>> = Vec::new();
    for (form, cones) in &groups {
        let mut gens: Vec<Vec<Q>> = Vec::new();
        for &c in cones {
            for &r in &fan.cone(c).rays {
                let v = fan.ray(r).to_vec();
                if !gens.contains(&v) {
                    gens.push(v);
                }
            }
        }
        // lineality of the hull: generators whose negative lies in the hull
        let mut lin: Vec<Vec<Q>> = fan.lineality().to_vec();
        for g in &gens {
            let neg = crate::rat::vec_neg(g);
            if crate::linalg::lp::in_cone(&gens, &lin, &neg) {
                lin.push(g.clone());
            }
        }
        let lin_mat = if lin.is_empty() {
            Mat::zeros(0, fan.ambient_dim())
        } else {
            Mat::from_rows(lin.clone())
        };
        let (lin_rref, pivots) = lin_mat.rref();
        let lin_basis: Vec<Vec<Q>> = (0..pivots.len()).map(|i| lin_rref.row(i).to_vec()).collect();
        match &hull_lineality {
            None => hull_lineality = Some(lin_basis.clone()),
            Some(existing) => {
                if existing != &lin_basis {
                    return Err(LefschetzError::Internal(
                        "linearity domains have unequal lineality spaces".into(),
                    ));
                }
            }
        }
        // extreme rays of the pointed part
        let mut extreme: Vec<Vec<Q>> = Vec::new();
        for (k, g) in gens.iter().enumerate() {
            // skip generators inside the lineality space
            let others: Vec<Vec<Q>> = gens
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, v)| v.clone())
                .collect();
            let in_lin = if lin_basis.is_empty() {
                crate::rat::vec_is_zero(g)
            } else {
                Mat::from_cols(lin_basis.iter().cloned().map(|mut v| {
                    v.truncate(fan.ambient_dim());
                    v
                }).collect())
                .solve_vec(g)
                .map(|c| {
                    let m = Mat::from_cols(lin_basis.clone());
                    m.mul_vec(&c) == *g
                })
                .unwrap_or(false)
            };
            if in_lin {
                continue;
            }
            if !crate::linalg::lp::in_cone(&others, &lin_basis, g) {
                extreme.push(g.clone());
            }
        }
        let mut cone_idx: Vec<usize> = Vec::new();
        for e in extreme {
            let pos = hull_rays.iter().position(|r| {
                crate::rat::normalize_positive(r) == crate::rat::normalize_positive(&e)
            });
            let idx = match pos {
                Some(i) => i,
                None => {
                    hull_rays.push(e);
                    hull_rays.len() - 1
                }
            };
            cone_idx.push(idx);
        }
        hull_cones.push(cone_idx);
        hull_forms.push(form.clone());
    }
    let lineality = hull_lineality.unwrap_or_default();
    let coarse = Arc::new(
        crate::fan::build_fan(fan.ambient_dim(), hull_rays, hull_cones.clone(), lineality)
            .map_err(|_| LefschetzError::NotConvex)?,
    );
    let map = SubdivisionMap::new(fan.clone(), coarse.clone())
        .map_err(|_| LefschetzError::NotConvex)?;
    // Forms on the coarse fan, aligned with its maximal cone order.
    let mut forms = Vec::new();
    for &mc in coarse.max_cones() {
        let fine = map
            .cones_over(mc)
            .into_iter()
            .find(|&c| map.source.max_cones().contains(&c))
            .ok_or_else(|| LefschetzError::Internal("coarse cone with empty fiber".into()))?;
        forms.push(l.form_on_cone(&map.source, fine).to_vec());
    }
    let coarse_l = PiecewiseLinear::new(&coarse, forms)?;
    Ok((coarse, coarse_l, map))
}

/// The complete-fan theorem: on a complete fan with `l` convex and `second`
/// strictly convex, the second function is a Lefschetz operator on the image
/// of `l` with the Hodge-Riemann signs shifted one step.
pub fn check_complete_theorem(
    fan: &Arc<Fan>,
    l: &PiecewiseLinear,
    second: &PiecewiseLinear,
    mode: Hypotheses,
) -> Result<CheckReport, LefschetzError> {
    let mut report = CheckReport::new("complete-fan");
    if classify_support(fan)? != SupportClass::Complete {
        return Err(LefschetzError::NotComplete);
    }
    report.hypothesis("fan: complete");
    let conv_l = check_convexity(l, fan)?;
    report.hypothesis(format!(
        "first function convex: {}",
        if conv_l.convex { "yes" } else { "NO" }
    ));
    if !conv_l.convex && mode == Hypotheses::Enforce {
        return Err(LefschetzError::NotConvex);
    }
    certify_strict(fan, second, mode, &mut report)?;
    // The coarsening on which l is strictly convex.
    let (coarse, coarse_l, coarse_map) = linearity_fan(fan, l)?;
    let strict_on_coarse = check_convexity(&coarse_l, &coarse)?;
    report.hypothesis(format!(
        "first function strictly convex on its linearity fan ({} maximal cones): {}",
        coarse.max_cones().len(),
        if strict_on_coarse.strictly_convex {
            "yes"
        } else {
            "NO"
        }
    ));
    if !strict_on_coarse.strictly_convex && mode == Hypotheses::Enforce {
        return Err(LefschetzError::NotConvex);
    }
    let _ = coarse_map;
    let ctx = IhContext::new(fan.clone(), None)?;
    let a_l = ctx.action(l)?;
    let a_second = ctx.action(second)?;
    // Well-definedness of the form on the image: pick a kernel vector of l
    // and verify the pairing is blind to it.
    let n = fan.ambient_dim() as i64;
    if let Some(block) = a_l.block(n - 2) {
        let ker = block.kernel_basis();
        if ker.ncols() > 0 && ctx.ih_dims().dim(n - 2) > 0 {
            let k = ker.col(0);
            let zero_class = a_l.block(n - 2).unwrap().mul_vec(&k);
            let mut probe = vec![Q::zero(); ctx.ih_dims().dim(n)];
            if !probe.is_empty() {
                probe[0] = Q::one();
                let v = ctx
                    .pair(n, &zero_class, n, &probe)
                    .map_err(LefschetzError::Pairing)?;
                report.push(DegreeRow {
                    label: "form is blind to the preimage choice".into(),
                    rank: 0,
                    required: 0,
                    inertia: None,
                    expected: "zero pairing against the kernel image".into(),
                    pass: v.is_zero(),
                });
            }
        }
    }
    let image = image_space(&ctx, &a_l, &a_second, ctx.cap)?;
    image.rows(&ctx, "", true, &mut report)?;
    Ok(report)
}

/// Outcome of the deformation check: per tested epsilon, whether the
/// perturbed function satisfies the Lefschetz and Hodge-Riemann statements on
/// the cohomology and on the image filtration.
#[derive(Debug)]
pub struct DeformationOutcome {
    pub reports: Vec<(Q, CheckReport)>,
    pub largest_passing: Option<Q>,
}

/// The default epsilon schedule 1/4, 1/8, ..., 2^-8.
pub fn default_epsilons() -> Vec<Q> {
    (2..=8).map(|k| crate::rat::qr(1, 1 << k)).collect()
}

/// Deformation statements: for small epsilon the function `l + eps^2 lhat`
/// satisfies hard Lefschetz and Hodge-Riemann on the (star-reduced)
/// cohomology of the source and on the image of `l` there.
pub fn check_deformation(
    map: &SubdivisionMap,
    tau: Option<ConeId>,
    l_target: &PiecewiseLinear,
    lhat: &PiecewiseLinear,
    epsilons: &[Q],
    mode: Hypotheses,
) -> Result<DeformationOutcome, LefschetzError> {
    if classify_support(&map.source)? != SupportClass::Complete {
        return Err(LefschetzError::NotComplete);
    }
    let mut hyp = CheckReport::new("deformation-hypotheses");
    certify_strict(&map.target, l_target, mode, &mut hyp)?;
    certify_relative(map, lhat, mode, &mut hyp)?;
    let l_src = l_target.pullback(map);
    // Star reduction once; each epsilon reuses the same context.
    let source = &map.source;
    let reduce = |f: &PiecewiseLinear| -> Result<(Arc<Fan>, PiecewiseLinear), LefschetzError> {
        match tau {
            None => Ok((source.clone(), f.clone())),
            Some(t) if t == source.minimal_cone() => Ok((source.clone(), f.clone())),
            Some(t) => star_reduction(source, t, f).map_err(LefschetzError::Pairing),
        }
    };
    let (rfan, rl) = reduce(&l_src)?;
    let ctx = IhContext::new(rfan.clone(), None)?;
    let mut pairing_blocks = BTreeMap::new();
    for (&d, _) in &ctx.w_dims {
        pairing_blocks.insert(d, ctx.w_pairing_block(d).map_err(LefschetzError::Pairing)?);
    }
    let a_l = ctx.action_on_w(&rl).map_err(LefschetzError::Pairing)?;
    let mut reports = Vec::new();
    let mut largest: Option<Q> = None;
    for eps in epsilons {
        let mut report = CheckReport::new(format!("deformation eps={}", crate::rat::fmt_q(eps)));
        report.hypotheses = hyp.hypotheses.clone();
        let f_eps = l_src.plus(&lhat.scaled(&(eps * eps)));
        let (_, rf) = reduce(&f_eps)?;
        let op = ctx.action_on_w(&rf).map_err(LefschetzError::Pairing)?;
        let space = LefSpace {
            center: rfan.ambient_dim() as i64,
            dims: ctx.w_dims.clone(),
            op: op.clone(),
            pairing: Some(pairing_blocks.clone()),
        };
        space.check_even()?;
        space.hl_rows("cohomology: ", &mut report);
        space.hr_rows("cohomology: ", &mut report)?;
        // Image filtration of l inside the reduced cohomology. The
        // multiplicity space of the reduced fan is the full cohomology, so
        // the plain action agrees with the restricted one.
        let full_l = ctx.action(&rl).map_err(LefschetzError::Pairing)?;
        let full_eps = ctx.action(&rf).map_err(LefschetzError::Pairing)?;
        let image = image_space(&ctx, &full_l, &full_eps, ctx.cap)?;
        image.rows(&ctx, "image: ", true, &mut report)?;
        if report.pass {
            let better = match &largest {
                None => true,
                Some(cur) => eps > cur,
            };
            if better {
                largest = Some(eps.clone());
            }
        }
        reports.push((eps.clone(), report));
    }
    Ok(DeformationOutcome {
        reports,
        largest_passing: largest,
    })
}

/// Explicit primitive decomposition of a graded space under a Lefschetz
/// operator.
#[derive(Debug)]
pub struct PrimitiveDecomposition {
    pub center: i64,
    /// Per degree `center - i`: the primitive dimensions.
    pub prim_dims: BTreeMap<i64, usize>,
    /// Bases of the components: keyed by (i, j), the j-th power image of the
    /// primitive part in degree `center - i`.
    pub components: BTreeMap<(i64, i64), Mat>,
}

pub fn primitive_decomposition(
    op: &GradedMap,
    dims: &BTreeMap<i64, usize>,
    center: i64,
) -> Result<PrimitiveDecomposition, LefschetzError> {
    let space = LefSpace {
        center,
        dims: dims.clone(),
        op: op.clone(),
        pairing: None,
    };
    space.check_even()?;
    let mut probe = CheckReport::new("hl");
    space.hl_rows("", &mut probe);
    if !probe.pass {
        return Err(LefschetzError::HLFailed);
    }
    let mut prim_dims = BTreeMap::new();
    let mut components = BTreeMap::new();
    let mut totals: BTreeMap<i64, usize> = BTreeMap::new();
    let mut i = 0;
    loop {
        let d = center - i;
        let below = space.dim(d - 2);
        let here = space.dim(d);
        if here == 0 && below == 0 && d < space.dims.keys().next().copied().unwrap_or(center) {
            break;
        }
        if i > 2 * center.abs() + 2 {
            break;
        }
        let prim = space.power_block(i as u32 + 1, d).kernel_basis();
        if here > 0 {
            if prim.ncols() != here.saturating_sub(below) {
                return Err(LefschetzError::Internal(format!(
                    "primitive dimension {} at degree {d}, expected {}",
                    prim.ncols(),
                    here - below.min(here)
                )));
            }
        }
        if prim.ncols() > 0 {
            prim_dims.insert(d, prim.ncols());
            for j in 0..=i {
                let image = space.power_block(j as u32, d).mul(&prim);
                *totals.entry(d + 2 * j).or_insert(0) += image.ncols();
                components.insert((i, j), image);
            }
        }
        i += 2;
        if center - i < 0 && space.dim(center - i) == 0 && center - i < -2 {
            break;
        }
    }
    for (&d, &k) in &space.dims {
        if k != totals.get(&d).copied().unwrap_or(0) {
            return Err(LefschetzError::Internal(format!(
                "decomposition misses degree {d}: {} of {k}",
                totals.get(&d).copied().unwrap_or(0)
            )));
        }
    }
    Ok(PrimitiveDecomposition {
        center,
        prim_dims,
        components,
    })
}
