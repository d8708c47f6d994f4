//! Decomposition of a sheaf model into multiplicity spaces: for each cone,
//! the kernel of the induced map from the reduced stalk to the reduced
//! boundary sections. The table is checked against the stalkwise sum rule
//! with independently built extension sheaves.

use super::minimal::minimal_extension_sheaf;
use super::sections::{ih_space, sections};
use super::{SheafError, SheafModel};
use crate::fan::{ConeId, Fan};
use crate::linalg::graded::GradedSpace;
use crate::linalg::mat::Mat;
use crate::rat::Q;
use num::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

/// The multiplicity spaces of a decomposition into shifted extension sheaves,
/// in the natural grading.
#[derive(Clone, Debug)]
pub struct MultiplicityTable {
    pub target: Arc<Fan>,
    /// Dimension of the minimal cone of the sheaf's original home fan; used
    /// to center the perverse grading.
    pub source_min_dim: usize,
    pub entries: BTreeMap<ConeId, GradedSpace>,
    /// Canonical kernel bases inside the reduced stalks, per cone and degree
    /// (columns are basis vectors in generator coordinates).
    pub bases: BTreeMap<(ConeId, i64), Mat>,
    pub provenance: String,
}

impl MultiplicityTable {
    pub fn entry(&self, cone: ConeId) -> GradedSpace {
        self.entries.get(&cone).cloned().unwrap_or_default()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut cones = serde_json::Map::new();
        for (c, dims) in &self.entries {
            if dims.is_empty() {
                continue;
            }
            cones.insert(format!("c{c}"), serde_json::to_value(dims).unwrap());
        }
        let legend: Vec<serde_json::Value> = self
            .target
            .cones()
            .map(|(id, data)| serde_json::json!({"id": format!("c{id}"), "rays": data.rays}))
            .collect();
        serde_json::json!({
            "provenance": self.provenance,
            "cones": legend,
            "multiplicities": cones,
        })
    }
}

/// Decomposes a sheaf model on its own fan. `source_min_dim` records the
/// minimal-cone dimension of the original sheaf for later centering (equal to
/// the target's for a sheaf born on this fan).
pub fn decompose(model: &SheafModel, source_min_dim: usize) -> Result<MultiplicityTable, SheafError> {
    let fan = &model.fan;
    let mut entries: BTreeMap<ConeId, GradedSpace> = BTreeMap::new();
    let mut bases: BTreeMap<(ConeId, i64), Mat> = BTreeMap::new();
    for (tau, data) in fan.cones() {
        let stalk = model.stalk(tau);
        if stalk.is_zero() {
            continue;
        }
        let boundary: Vec<ConeId> = data.faces.iter().copied().filter(|&f| f != tau).collect();
        let sec = sections(model, &boundary)?;
        let quot = ih_space(&sec);
        // Reduced stalk basis: the generators themselves. The induced map
        // sends a generator to its restriction, reduced mod m.
        let mut dims = GradedSpace::new();
        let gen_space = stalk.generator_space();
        for (g, count) in gen_space.iter() {
            let sec_dim = sec.dim(g);
            let mut cols: Vec<Vec<Q>> = Vec::with_capacity(count);
            for k in stalk
                .gens
                .iter()
                .enumerate()
                .filter(|(_, &gd)| gd == g)
                .map(|(k, _)| k)
            {
                // the generator is the stalk basis element (k, trivial monomial)
                let basis = stalk.basis(g);
                let col = basis
                    .iter()
                    .position(|(kk, e)| *kk == k && e.iter().all(|&p| p == 0))
                    .expect("generator appears in its own degree");
                let mut unit = vec![Q::zero(); basis.len()];
                unit[col] = num::One::one();
                let mut comps: BTreeMap<ConeId, Vec<Q>> = BTreeMap::new();
                for &c in &sec.carriers {
                    let r = model
                        .restriction(tau, c)
                        .ok_or_else(|| SheafError::Internal("missing restriction".into()))?;
                    let rows = model.stalk(c).dim(g);
                    let block = r
                        .block(g)
                        .cloned()
                        .unwrap_or_else(|| Mat::zeros(rows, basis.len()));
                    comps.insert(c, block.mul_vec(&unit));
                }
                let sv = sec.express(g, &comps)?;
                cols.push(quot.project(g, &sv));
            }
            let reduced_dim = quot.dims.dim(g);
            let m = if cols.is_empty() {
                Mat::zeros(reduced_dim, 0)
            } else {
                Mat::from_cols(cols)
            };
            debug_assert_eq!(m.nrows(), reduced_dim);
            debug_assert_eq!(m.ncols(), count);
            let _ = sec_dim;
            let kernel = m.kernel_basis();
            if kernel.ncols() > 0 {
                dims.set_dim(g, kernel.ncols());
                bases.insert((tau, g), kernel);
            }
        }
        if !dims.is_empty() {
            entries.insert(tau, dims);
        }
    }
    let table = MultiplicityTable {
        target: fan.clone(),
        source_min_dim,
        entries,
        bases,
        provenance: "decomposition".into(),
    };
    check_sum_rule(model, &table)?;
    Ok(table)
}

/// Stalkwise sum rule: the Hilbert series of every stalk must equal the sum
/// over faces of the multiplicity series times the extension-sheaf stalk
/// series, the latter built independently.
fn check_sum_rule(model: &SheafModel, table: &MultiplicityTable) -> Result<(), SheafError> {
    let fan = &model.fan;
    let cap = model.cap;
    let slots = (cap / 2 + 1) as usize;
    let mut extension_gens: BTreeMap<ConeId, SheafModel> = BTreeMap::new();
    for (rho, data) in fan.cones() {
        if model.stalk(rho).is_zero() {
            continue;
        }
        let lhs = model.stalk(rho).hilbert(cap);
        let mut rhs = vec![0i64; slots];
        for &sigma in &data.faces {
            let Some(w) = table.entries.get(&sigma) else {
                continue;
            };
            let ext = match extension_gens.get(&sigma) {
                Some(e) => e,
                None => {
                    let e = minimal_extension_sheaf(fan, sigma, cap)?;
                    extension_gens.insert(sigma, e);
                    &extension_gens[&sigma]
                }
            };
            let lrho = ext.stalk(rho).hilbert(cap);
            for (wd, wk) in w.iter() {
                let shift = (wd / 2) as usize;
                for (i, &c) in lrho.iter().enumerate() {
                    if shift + i < slots {
                        rhs[shift + i] += wk as i64 * c;
                    }
                }
            }
        }
        if lhs != rhs {
            return Err(SheafError::SumRuleViolation(format!(
                "stalk at cone {rho}: Hilbert {lhs:?} vs decomposition {rhs:?}"
            )));
        }
    }
    Ok(())
}

/// The table re-centered into the perverse grading, with the filtration
/// dimensions.
#[derive(Clone, Debug)]
pub struct PerverseTable {
    /// Per cone: centered degree -> dimension.
    pub entries: BTreeMap<ConeId, BTreeMap<i64, usize>>,
    /// Per level p: total multiplicity of summands at levels <= p.
    pub filtration: BTreeMap<i64, usize>,
}

impl PerverseTable {
    /// True when the whole table is concentrated in level zero.
    pub fn concentrated_at_zero(&self) -> bool {
        self.entries
            .values()
            .all(|m| m.keys().all(|&p| p == 0))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let centered: BTreeMap<String, BTreeMap<String, usize>> = self
            .entries
            .iter()
            .map(|(c, m)| {
                (
                    format!("c{c}"),
                    m.iter().map(|(p, k)| (p.to_string(), *k)).collect(),
                )
            })
            .collect();
        let filtration: BTreeMap<String, usize> = self
            .filtration
            .iter()
            .map(|(p, k)| (p.to_string(), *k))
            .collect();
        serde_json::json!({"centered": centered, "filtration": filtration})
    }
}

pub fn perverse_table(table: &MultiplicityTable) -> PerverseTable {
    let mut entries: BTreeMap<ConeId, BTreeMap<i64, usize>> = BTreeMap::new();
    for (&cone, dims) in &table.entries {
        let center = table.target.cone(cone).dim as i64 - table.source_min_dim as i64;
        let mut m = BTreeMap::new();
        for (d, k) in dims.iter() {
            m.insert(d - center, k);
        }
        if !m.is_empty() {
            entries.insert(cone, m);
        }
    }
    let mut levels: BTreeMap<i64, usize> = BTreeMap::new();
    for m in entries.values() {
        for (&p, &k) in m {
            *levels.entry(p).or_insert(0) += k;
        }
    }
    let mut filtration = BTreeMap::new();
    let mut acc = 0usize;
    for (&p, &k) in &levels {
        acc += k;
        filtration.insert(p, acc);
    }
    PerverseTable { entries, filtration }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::{build_fan, star_subdivision, SubdivisionMap};
    use crate::rat::qvec;
    use crate::sheaf::{minimal_extension_sheaf, pushforward};
    use std::sync::Arc;

    #[test]
    fn indecomposable_sheaf_decomposes_trivially() {
        let fan = Arc::new(crate::fan::tests::quadrant_fan());
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 6).unwrap();
        let table = decompose(&model, 0).unwrap();
        assert_eq!(table.entries.len(), 1);
        assert_eq!(
            table.entry(fan.minimal_cone()),
            GradedSpace::from_pairs(&[(0, 1)])
        );
        let pv = perverse_table(&table);
        assert!(pv.concentrated_at_zero());
    }

    #[test]
    fn identity_subdivision_gives_identity_table() {
        let fan = Arc::new(crate::fan::tests::quadrant_fan());
        let map = SubdivisionMap::new(fan.clone(), fan.clone()).unwrap();
        let model = minimal_extension_sheaf(&fan, fan.minimal_cone(), 6).unwrap();
        let pushed = pushforward(&map, &model).unwrap();
        let table = decompose(&pushed, 0).unwrap();
        assert_eq!(table.entries.len(), 1);
        assert_eq!(table.entry(fan.minimal_cone()), GradedSpace::from_pairs(&[(0, 1)]));
    }

    #[test]
    fn edge_split_local_h() {
        let fan = build_fan(
            2,
            vec![qvec(&[1, 0]), qvec(&[0, 1])],
            vec![vec![0, 1]],
            vec![],
        )
        .unwrap();
        let top = fan.max_cones()[0];
        let (refined, map) = star_subdivision(&fan, top, &qvec(&[1, 1])).unwrap();
        let model = minimal_extension_sheaf(&refined, refined.minimal_cone(), 6).unwrap();
        let pushed = pushforward(&map, &model).unwrap();
        let table = decompose(&pushed, 0).unwrap();
        assert_eq!(table.entry(top), GradedSpace::from_pairs(&[(2, 1)]));
        assert_eq!(
            table.entry(map.target.minimal_cone()),
            GradedSpace::from_pairs(&[(0, 1)])
        );
        // matches the alternating-sum oracle
        let oracle = crate::fan::local_h_oracle(&map).unwrap();
        assert_eq!(oracle, vec![0, 1, 0]);
        // centered grading: the wall entry sits at level 0
        let pv = perverse_table(&table);
        assert_eq!(pv.entries[&top], BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn barycentric_of_3cone_local_h() {
        // Full barycentric subdivision of a simplicial 3-cone.
        let fan = build_fan(
            3,
            vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0]), qvec(&[0, 0, 1])],
            vec![vec![0, 1, 2]],
            vec![],
        )
        .unwrap();
        let (refined, map, _) = crate::fan::barycentric_subdivision(&fan).unwrap();
        let oracle = crate::fan::local_h_oracle(&map).unwrap();
        assert_eq!(oracle, vec![0, 1, 1, 0]);
        let model = minimal_extension_sheaf(&refined, refined.minimal_cone(), 6).unwrap();
        let pushed = pushforward(&map, &model).unwrap();
        let table = decompose(&pushed, 0).unwrap();
        let top = map.target.max_cones()[0];
        assert_eq!(table.entry(top), GradedSpace::from_pairs(&[(2, 1), (4, 1)]));
        let pv = perverse_table(&table);
        assert_eq!(pv.entries[&top], BTreeMap::from([(-1, 1), (1, 1)]));
    }
}
