//! JSON formats: fans (maximal cones only), subdivisions, and piecewise
//! linear functions. Rationals are `"p/q"` strings.

use super::subdivide::SubdivisionMap;
use super::{build_fan, Fan, FanError, PiecewiseLinear};
use crate::rat::{fmt_q, parse_q, Q};
use serde::Deserialize;
use std::sync::Arc;

#[derive(Deserialize)]
struct FanJson {
    dim: usize,
    #[serde(default)]
    lineality: Vec<Vec<String>>,
    rays: Vec<Vec<String>>,
    cones: Vec<Vec<usize>>,
}

fn parse_vec(v: &[String]) -> Result<Vec<Q>, FanError> {
    v.iter()
        .map(|s| parse_q(s).map_err(FanError::Input))
        .collect()
}

pub fn fan_from_json(value: &serde_json::Value) -> Result<Fan, FanError> {
    let spec: FanJson =
        serde_json::from_value(value.clone()).map_err(|e| FanError::Input(e.to_string()))?;
    let rays = spec
        .rays
        .iter()
        .map(|r| parse_vec(r))
        .collect::<Result<Vec<_>, _>>()?;
    let lineality = spec
        .lineality
        .iter()
        .map(|l| parse_vec(l))
        .collect::<Result<Vec<_>, _>>()?;
    build_fan(spec.dim, rays, spec.cones, lineality)
}

pub fn fan_to_json(fan: &Fan) -> serde_json::Value {
    let rays: Vec<Vec<String>> = fan
        .rays()
        .iter()
        .map(|r| r.iter().map(fmt_q).collect())
        .collect();
    let lineality: Vec<Vec<String>> = fan
        .lineality()
        .iter()
        .map(|l| l.iter().map(fmt_q).collect())
        .collect();
    let cones: Vec<Vec<usize>> = fan
        .max_cones()
        .iter()
        .map(|&c| fan.cone(c).rays.clone())
        .collect();
    serde_json::json!({
        "dim": fan.ambient_dim(),
        "lineality": lineality,
        "rays": rays,
        "cones": cones,
    })
}

#[derive(Deserialize)]
struct SubdivisionJson {
    source: serde_json::Value,
    target: serde_json::Value,
    #[serde(default)]
    assignment: Option<Vec<usize>>,
}

pub fn subdivision_from_json(value: &serde_json::Value) -> Result<SubdivisionMap, FanError> {
    let spec: SubdivisionJson =
        serde_json::from_value(value.clone()).map_err(|e| FanError::Input(e.to_string()))?;
    let source = Arc::new(fan_from_json(&spec.source)?);
    let target = Arc::new(fan_from_json(&spec.target)?);
    match spec.assignment {
        Some(a) => SubdivisionMap::with_assignment(source, target, a),
        None => SubdivisionMap::new(source, target),
    }
}

pub fn subdivision_to_json(map: &SubdivisionMap) -> serde_json::Value {
    serde_json::json!({
        "source": fan_to_json(&map.source),
        "target": fan_to_json(&map.target),
        "assignment": map.assignment,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FunctionJson {
    Forms { forms: Vec<Vec<String>> },
    RayValues { ray_values: Vec<String> },
}

/// Piecewise linear input: either explicit per-maximal-cone forms (in the
/// maximal cone order of the fan) or ray values (simplicial fans only).
pub fn function_from_json(
    fan: &Fan,
    value: &serde_json::Value,
) -> Result<PiecewiseLinear, FanError> {
    let spec: FunctionJson =
        serde_json::from_value(value.clone()).map_err(|e| FanError::Input(e.to_string()))?;
    match spec {
        FunctionJson::Forms { forms } => {
            let forms = forms
                .iter()
                .map(|f| parse_vec(f))
                .collect::<Result<Vec<_>, _>>()?;
            PiecewiseLinear::new(fan, forms)
        }
        FunctionJson::RayValues { ray_values } => {
            let values = parse_vec(&ray_values)?;
            PiecewiseLinear::from_ray_values(fan, &values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_round_trip() {
        let v: serde_json::Value = serde_json::json!({
            "dim": 2,
            "rays": [["1", "0"], ["0", "1"], ["-1", "0"], ["0", "-1"]],
            "cones": [[0, 1], [1, 2], [2, 3], [3, 0]],
        });
        let fan = fan_from_json(&v).unwrap();
        assert_eq!(fan.f_vector(), vec![1, 4, 4]);
        let back = fan_to_json(&fan);
        let fan2 = fan_from_json(&back).unwrap();
        assert_eq!(fan2.f_vector(), vec![1, 4, 4]);
        assert_eq!(back, fan_to_json(&fan2));
    }

    #[test]
    fn subdivision_round_trip_with_assignment_check() {
        let target = serde_json::json!({
            "dim": 2,
            "rays": [["1", "0"], ["0", "1"]],
            "cones": [[0, 1]],
        });
        let source = serde_json::json!({
            "dim": 2,
            "rays": [["1", "0"], ["0", "1"], ["1", "1"]],
            "cones": [[0, 2], [1, 2]],
        });
        let v = serde_json::json!({"source": source, "target": target});
        let map = subdivision_from_json(&v).unwrap();
        let round = subdivision_to_json(&map);
        let map2 = subdivision_from_json(&round).unwrap();
        assert_eq!(map.assignment, map2.assignment);
        // corrupt the assignment
        let mut bad = round.clone();
        bad["assignment"][0] = serde_json::json!(1);
        assert!(subdivision_from_json(&bad).is_err());
    }

    #[test]
    fn function_parsing() {
        let fan = crate::fan::tests::line_fan();
        let f =
            function_from_json(&fan, &serde_json::json!({"forms": [["1"], ["-1"]]})).unwrap();
        let g = function_from_json(&fan, &serde_json::json!({"ray_values": ["1", "1"]})).unwrap();
        assert_eq!(f, g);
        assert!(function_from_json(&fan, &serde_json::json!({"forms": [["1"]]})).is_err());
    }
}
