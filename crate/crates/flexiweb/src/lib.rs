//! Browser bindings for the flexible-polyhedra demo.
//!
//! Three interactive operations back the static page in `www/`:
//! a flexing Bricard octahedron sampled at a parameter, its volume and
//! edge-deviation curve over a sweep, and the flexible spherical bipyramid
//! whose volume genuinely changes. Everything returns JSON strings; the
//! page owns all rendering.

use flexilab::families::{fixtures, FlexFamily, Flexion};
use flexilab::volumetrics::{
    generalized_volume_euclidean, spherical_representative, BipyramidFamily,
};
use serde_json::json;
use std::cell::RefCell;
use std::collections::HashMap;
use wasm_bindgen::prelude::*;

thread_local! {
    static FAMILIES: RefCell<HashMap<String, FlexFamily>> = RefCell::new(HashMap::new());
}

fn with_family<T>(kind: &str, f: impl FnOnce(&FlexFamily) -> T) -> Result<T, String> {
    FAMILIES.with(|cache| {
        let mut cache = cache.borrow_mut();
        if !cache.contains_key(kind) {
            let family = match kind {
                "bricard1" => FlexFamily::Elliptic(fixtures::elliptic(3)),
                "bricard2" => fixtures::bricard_type_ii(),
                "bricard3" => FlexFamily::Rational(fixtures::rational(3)),
                "rational4" => FlexFamily::Rational(fixtures::rational(4)),
                other => return Err(format!("unknown family '{other}'")),
            };
            cache.insert(kind.to_string(), family);
        }
        Ok(f(cache.get(kind).unwrap()))
    })
}

/// Available demo families with their parameter ranges.
#[wasm_bindgen]
pub fn catalog() -> String {
    let entry = |kind: &str, label: &str, range: (f64, f64), blurb: &str| {
        json!({
            "kind": kind,
            "label": label,
            "range": [range.0, range.1],
            "blurb": blurb,
        })
    };
    let bricard1_range = with_family("bricard1", |f| f.default_range()).unwrap();
    let bricard2_range = with_family("bricard2", |f| f.default_range()).unwrap();
    let list = vec![
        entry(
            "bricard1",
            "Bricard type I (line-symmetric, elliptic)",
            bricard1_range,
            "An octahedron flexing along Jacobi dn-profiles; the three diagonals share a perpendicular bisector line at every instant.",
        ),
        entry(
            "bricard3",
            "Bricard type III (skew, rational)",
            (-2.0, 2.0),
            "The algebraically simplest flexion: half-angle tangents stay proportional to the parameter. Flat at u = 0.",
        ),
        entry(
            "bricard2",
            "Bricard type II (plane-symmetric, tracked)",
            bricard2_range,
            "Found numerically by predictor-corrector continuation on the edge-length variety, parametrized by arclength.",
        ),
    ];
    json!(list).to_string()
}

/// One configuration of a family: vertex positions, wireframe, volume.
#[wasm_bindgen]
pub fn flex_sample(kind: &str, u: f64) -> String {
    let result = with_family(kind, |family| {
        let p = match family.eval(u) {
            Ok(p) => p,
            Err(e) => return json!({ "error": e.to_string() }).to_string(),
        };
        let reference = match family.eval(family.default_range().0) {
            Ok(q) => q.edge_lengths(),
            Err(e) => return json!({ "error": e.to_string() }).to_string(),
        };
        let vertices: Vec<Vec<f64>> = p.coords.iter().map(|c| c.iter().cloned().collect()).collect();
        let edges: Vec<(usize, usize)> = p.complex.edges().to_vec();
        let volume = generalized_volume_euclidean(&p);
        json!({
            "names": p.complex.vertex_names(),
            "vertices": vertices,
            "edges": edges,
            "diagonals": p.complex.diagonals(),
            "facets": p.complex.facets(),
            "edge_dev": p.max_edge_deviation(&reference),
            "volume": volume,
        })
        .to_string()
    });
    result.unwrap_or_else(|e| json!({ "error": e }).to_string())
}

/// Volume and edge-deviation curves over the family's parameter range.
#[wasm_bindgen]
pub fn bellows_curve(kind: &str, steps: usize) -> String {
    let steps = steps.clamp(2, 2001);
    let result = with_family(kind, |family| {
        let (lo, hi) = family.default_range();
        let mut us = Vec::with_capacity(steps);
        let mut volumes = Vec::with_capacity(steps);
        let mut edge_dev = Vec::with_capacity(steps);
        let reference = match family.eval(lo) {
            Ok(q) => q.edge_lengths(),
            Err(e) => return json!({ "error": e.to_string() }).to_string(),
        };
        for i in 0..steps {
            let u = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            match family.eval(u) {
                Ok(p) => {
                    us.push(u);
                    volumes.push(generalized_volume_euclidean(&p));
                    edge_dev.push(p.max_edge_deviation(&reference));
                }
                Err(_) => continue,
            }
        }
        json!({ "u": us, "volume": volumes, "edge_dev": edge_dev }).to_string()
    });
    result.unwrap_or_else(|e| json!({ "error": e }).to_string())
}

/// The spherical counterexample: bipyramid over a flexible quadrilateral
/// with equal sides, at diagonal `d`.
#[wasm_bindgen]
pub fn bipyramid_sample(d: f64) -> String {
    let family = match BipyramidFamily::new([0.6; 4]) {
        Ok(f) => f,
        Err(e) => return json!({ "error": e.to_string() }).to_string(),
    };
    let (lo, hi) = family.default_range();
    let d = d.clamp(lo, hi);
    let area = match family.base_area(d) {
        Ok(a) => a,
        Err(e) => return json!({ "error": e.to_string() }).to_string(),
    };
    let p = match family.eval(d) {
        Ok(p) => p,
        Err(e) => return json!({ "error": e.to_string() }).to_string(),
    };
    // Base vertices on S^2 (drop the suspension coordinate) plus the area
    // curve over the feasible interval.
    let base: Vec<Vec<f64>> = p.coords[2..]
        .iter()
        .map(|c| vec![c[1], c[2], c[3]])
        .collect();
    let steps = 121;
    let mut ds = Vec::with_capacity(steps);
    let mut volumes = Vec::with_capacity(steps);
    for i in 0..steps {
        let di = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        if let Ok(a) = family.base_area(di) {
            ds.push(di);
            volumes.push(spherical_representative(std::f64::consts::FRAC_PI_2 * a));
        }
    }
    json!({
        "d": d,
        "range": [lo, hi],
        "base": base,
        "area": area,
        "volume": spherical_representative(std::f64::consts::FRAC_PI_2 * area),
        "curve": { "d": ds, "volume": volumes },
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_lists_three_families() {
        let v: serde_json::Value = serde_json::from_str(&catalog()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 3);
    }

    #[test]
    fn flex_sample_shape() {
        let v: serde_json::Value = serde_json::from_str(&flex_sample("bricard1", 0.7)).unwrap();
        assert!(v.get("error").is_none(), "{v}");
        assert_eq!(v["vertices"].as_array().unwrap().len(), 6);
        assert_eq!(v["edges"].as_array().unwrap().len(), 12);
        assert!(v["edge_dev"].as_f64().unwrap() < 1e-9);
    }

    #[test]
    fn bellows_curve_is_flat_for_bricard() {
        let v: serde_json::Value =
            serde_json::from_str(&bellows_curve("bricard3", 101)).unwrap();
        let vols = v["volume"].as_array().unwrap();
        let v0 = vols[0].as_f64().unwrap();
        for x in vols {
            assert!((x.as_f64().unwrap() - v0).abs() < 1e-8);
        }
    }

    #[test]
    fn bipyramid_volume_moves() {
        let a: serde_json::Value = serde_json::from_str(&bipyramid_sample(0.3)).unwrap();
        let b: serde_json::Value = serde_json::from_str(&bipyramid_sample(0.85)).unwrap();
        let va = a["volume"].as_f64().unwrap();
        let vb = b["volume"].as_f64().unwrap();
        assert!((va - vb).abs() > 0.05, "{va} vs {vb}");
        assert_eq!(a["base"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn unknown_kind_reports_error() {
        let v: serde_json::Value = serde_json::from_str(&flex_sample("nope", 0.0)).unwrap();
        assert!(v.get("error").is_some());
    }
}
