//! Report emitters: JSON and CSV artifacts with lossless float formatting.

use crate::files::{AnyFamily, FamilyFile};
use anyhow::Result;
use flexilab::confspace::{RigidityReport, TrackedPath, VarietySystem};
use flexilab::elliptica::{biquad_coefficients, jacobi};
use flexilab::families::{
    fit_biquadratic, fixed_simplex_ridges, normalize_tangents, tangent_profile, FamilySweep,
    FlexFamily, Flexion, TangentConvention,
};
use flexilab::geomkit::Polyhedron;
use serde_json::{json, Value};

/// 17 significant digits: enough to reparse any f64 exactly.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn coords_json(p: &Polyhedron) -> Value {
    let mut map = serde_json::Map::new();
    for (v, name) in p.complex.vertex_names().iter().enumerate() {
        map.insert(
            name.clone(),
            Value::from(p.coords[v].iter().cloned().collect::<Vec<f64>>()),
        );
    }
    Value::Object(map)
}

pub fn construct_report(file: &FamilyFile, family: &AnyFamily) -> Result<String> {
    let mut body = json!({
        "spec": serde_json::to_value(file)?,
    });
    match family {
        AnyFamily::Flex(FlexFamily::Elliptic(f)) => {
            let gram: Vec<Vec<f64>> = (0..f.gram.nrows())
                .map(|i| (0..f.gram.ncols()).map(|j| f.gram[(i, j)]).collect())
                .collect();
            body["quarter_period"] = json!(f.modulus.quarter_period);
            body["gram"] = json!(gram);
            body["frame"] = json!({
                "vertices": f.frame.vertices.iter()
                    .map(|v| v.iter().cloned().collect::<Vec<f64>>())
                    .collect::<Vec<_>>(),
                "altitudes": f.frame.altitudes,
            });
        }
        AnyFamily::Flex(FlexFamily::Rational(f)) => {
            body["frame"] = json!({
                "altitudes": f.spec.frame.altitudes,
            });
        }
        AnyFamily::Flex(FlexFamily::Tracked(f)) => {
            body["tracked_samples"] = json!(f.samples.len());
            let (lo, hi) = f.default_range();
            body["arclength_range"] = json!([lo, hi]);
        }
        AnyFamily::Bipyramid(f) => {
            let (lo, hi) = f.default_range();
            body["diagonal_range"] = json!([lo, hi]);
        }
    }
    Ok(serde_json::to_string_pretty(&body)? + "\n")
}

pub fn sweep_json(file: &FamilyFile, family: &AnyFamily, sweep: &FamilySweep) -> Result<String> {
    let complex = family.complex();
    let edges: Vec<[String; 2]> = complex
        .edges()
        .iter()
        .map(|&(u, v)| {
            [
                complex.vertex_names()[u].clone(),
                complex.vertex_names()[v].clone(),
            ]
        })
        .collect();
    let samples: Vec<Value> = sweep
        .samples
        .iter()
        .map(|s| {
            json!({
                "u": s.u,
                "coordinates": coords_json(&s.polyhedron),
                "edge_dev": s.edge_deviation,
                "flat": s.flat,
                "degenerate_facets": s.degenerate_facets,
            })
        })
        .collect();
    let body = json!({
        "family": serde_json::to_value(file)?,
        "edges": edges,
        "reference_lengths": sweep.reference_lengths,
        "samples": samples,
    });
    Ok(serde_json::to_string_pretty(&body)? + "\n")
}

pub fn sweep_csv(family: &AnyFamily, sweep: &FamilySweep) -> String {
    let complex = family.complex();
    let ambient = family.space().ambient_dim();
    let mut header = vec!["u".to_string()];
    for name in complex.vertex_names() {
        for s in 0..ambient {
            header.push(format!("{name}_{s}"));
        }
    }
    header.push("edge_dev".into());
    let mut out = header.join(",") + "\n";
    for s in &sweep.samples {
        let mut row = vec![fmt(s.u)];
        for c in &s.polyhedron.coords {
            for x in c.iter() {
                row.push(fmt(*x));
            }
        }
        row.push(fmt(s.edge_deviation));
        out.push_str(&(row.join(",") + "\n"));
    }
    out
}

pub fn track_json<S: VarietySystem>(system: &S, path: &TrackedPath) -> Result<String> {
    let samples: Vec<Value> = path
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let poly = system.polyhedron(&s.vars);
            json!({
                "step": i,
                "arclength": s.arclength,
                "coordinates": coords_json(&poly),
                "degenerate_facets": s.degenerate_facets,
                "flat": s.flat,
            })
        })
        .collect();
    let body = json!({
        "stop": format!("{:?}", path.stop),
        "samples": samples,
    });
    Ok(serde_json::to_string_pretty(&body)? + "\n")
}

pub fn track_csv<S: VarietySystem>(system: &S, path: &TrackedPath) -> String {
    let complex = system.complex();
    let ambient = system.space().ambient_dim();
    let mut header = vec!["step".to_string(), "arclength".to_string()];
    for name in complex.vertex_names() {
        for s in 0..ambient {
            header.push(format!("{name}_{s}"));
        }
    }
    let mut out = header.join(",") + "\n";
    for (i, s) in path.samples.iter().enumerate() {
        let poly = system.polyhedron(&s.vars);
        let mut row = vec![i.to_string(), fmt(s.arclength)];
        for c in &poly.coords {
            for x in c.iter() {
                row.push(fmt(*x));
            }
        }
        out.push_str(&(row.join(",") + "\n"));
    }
    out
}

pub fn rigidity_json<S: VarietySystem>(
    system: &S,
    report: Option<&RigidityReport>,
) -> Result<String> {
    let mut body = json!({
        "variables": system.variable_count(),
        "equations": system.equation_count(),
    });
    if let Some(r) = report {
        body["kernel_dim"] = json!(r.kernel_dim);
        body["min_singular_value"] = json!(r.min_singular_value);
        body["residual"] = json!(r.residual_norm);
        body["flexible"] = json!(r.kernel_dim > 0);
    }
    Ok(serde_json::to_string_pretty(&body)? + "\n")
}

pub fn volume_json(
    poly: &Polyhedron,
    method: crate::Method,
    samples: usize,
    seed: u64,
) -> Result<String> {
    let body = match method {
        crate::Method::ConeSum => {
            anyhow::ensure!(
                poly.space.is_euclidean(),
                "cone-sum volumes are Euclidean; use monte-carlo on the sphere"
            );
            json!({
                "method": "cone-sum",
                "volume": flexilab::volumetrics::generalized_volume_euclidean(poly),
            })
        }
        crate::Method::MonteCarlo => {
            let est = flexilab::volumetrics::monte_carlo_volume(poly, None, samples, seed)?;
            json!({
                "method": "monte-carlo",
                "volume": est.value,
                "std_error": est.std_error,
                "samples": est.samples,
            })
        }
        crate::Method::Schlafli => {
            anyhow::bail!("schlafli integrates volume changes along paths; use verify bellows")
        }
    };
    Ok(serde_json::to_string_pretty(&body)? + "\n")
}

/// Tangent-structure verification. For rational families each fixed-simplex
/// ridge tangent must be proportional to the parameter; for elliptic ones
/// each must be proportional to `dn(u - sigma_i)` and every tangent pair
/// must satisfy the biquadratic relation with the predicted coefficients.
pub fn biquad_report(
    file: &FamilyFile,
    family: &AnyFamily,
    from: f64,
    to: f64,
    steps: usize,
    tol: f64,
) -> Result<(String, bool)> {
    let n = match file {
        FamilyFile::Rational { n, .. } | FamilyFile::Elliptic { n, .. } => *n,
        _ => anyhow::bail!("biquad verification applies to rational and elliptic cross-polytope families"),
    };
    let ridges = fixed_simplex_ridges(n);
    let us: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    let profile = tangent_profile(family, &ridges, &us)?;
    let mut ok = true;
    let mut checks = Vec::new();
    match file {
        FamilyFile::Rational { .. } => {
            for (ri, col) in profile.values.iter().enumerate() {
                let (conv, scale, dev) = normalize_tangents(&us, col)?;
                ok &= dev < tol;
                checks.push(json!({
                    "ridge": ridges[ri],
                    "target": "u",
                    "convention": format!("{conv:?}"),
                    "scale": scale,
                    "deviation": dev,
                    "pass": dev < tol,
                }));
            }
        }
        FamilyFile::Elliptic { k, sigma, .. } => {
            let mut normalized: Vec<Vec<f64>> = Vec::new();
            for (ri, col) in profile.values.iter().enumerate() {
                let target: Vec<f64> = us
                    .iter()
                    .map(|&u| jacobi(u - sigma[ri], *k).unwrap().dn)
                    .collect();
                let (conv, scale, dev) = normalize_tangents(&target, col)?;
                ok &= dev < tol;
                checks.push(json!({
                    "ridge": ridges[ri],
                    "target": "dn(u - sigma)",
                    "convention": format!("{conv:?}"),
                    "scale": scale,
                    "deviation": dev,
                    "pass": dev < tol,
                }));
                normalized.push(
                    col.iter()
                        .map(|t| {
                            let t = t.unwrap_or(f64::NAN);
                            let v = match conv {
                                TangentConvention::Direct => t,
                                TangentConvention::Inverse => 1.0 / t,
                            };
                            v / scale
                        })
                        .collect(),
                );
            }
            for i in 0..n {
                for j in i + 1..n {
                    let pairs: Vec<(f64, f64)> = normalized[i]
                        .iter()
                        .zip(&normalized[j])
                        .filter(|(a, b)| a.is_finite() && b.is_finite())
                        .map(|(&a, &b)| (a, b))
                        .collect();
                    let (fitted, residual) = fit_biquadratic(&pairs);
                    let rel = biquad_coefficients(sigma[i] - sigma[j], *k)?;
                    let mut expected = rel.coefficients();
                    let norm: f64 = expected.iter().map(|c| c * c).sum::<f64>().sqrt();
                    expected.iter_mut().for_each(|c| *c /= norm);
                    let lead = expected
                        .iter()
                        .cloned()
                        .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
                        .unwrap();
                    if lead < 0.0 {
                        expected.iter_mut().for_each(|c| *c = -*c);
                    }
                    let coeff_dev = fitted
                        .iter()
                        .zip(expected.iter())
                        .map(|(f, e)| (f - e).abs())
                        .fold(0.0, f64::max);
                    let pass = residual < tol && coeff_dev < tol;
                    ok &= pass;
                    checks.push(json!({
                        "pair": [i, j],
                        "fit_residual": residual,
                        "coefficient_deviation": coeff_dev,
                        "pass": pass,
                    }));
                }
            }
        }
        _ => unreachable!(),
    }
    let body = json!({
        "tolerance": tol,
        "checks": checks,
        "verdict": if ok { "pass" } else { "fail" },
    });
    Ok((serde_json::to_string_pretty(&body)? + "\n", ok))
}
