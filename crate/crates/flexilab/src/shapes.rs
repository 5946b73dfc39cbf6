//! Reference polyhedra used by the command line, the test suites, and the
//! browser demo.

use crate::complexes::{cross_polytope_complex, PseudoManifold};
use crate::geomkit::{ModelSpace, Polyhedron};
use nalgebra::DVector;
use std::sync::Arc;

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

/// Cross-polytope on the standard basis: vertices `+-e_i`, outward
/// orientation (oriented volume `2^n / n!`).
pub fn regular_cross_polytope(n: usize) -> Polyhedron {
    let complex = Arc::new(cross_polytope_complex(n));
    let mut coords = Vec::with_capacity(2 * n);
    for sign in [1.0, -1.0] {
        for i in 0..n {
            let mut v = DVector::zeros(n);
            v[i] = sign;
            coords.push(v);
        }
    }
    Polyhedron::new(ModelSpace::Euclidean(n), complex, coords)
}

/// Unit cube with each face split into two triangles, outward orientation.
pub fn triangulated_cube() -> Polyhedron {
    let verts = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let quads = [
        [0usize, 3, 2, 1],
        [4, 5, 6, 7],
        [0, 1, 5, 4],
        [1, 2, 6, 5],
        [2, 3, 7, 6],
        [3, 0, 4, 7],
    ];
    let names: Vec<String> = (0..8).map(|i| format!("v{i}")).collect();
    let mut facets = Vec::new();
    for q in quads {
        facets.push(vec![q[0], q[1], q[2]]);
        facets.push(vec![q[0], q[2], q[3]]);
    }
    let complex = Arc::new(PseudoManifold::build(names, facets).expect("cube is valid"));
    let coords = verts.iter().map(|v| dv(v)).collect();
    Polyhedron::new(ModelSpace::Euclidean(3), complex, coords)
}

/// Octahedron with one vertex pulled toward the centroid: embedded but not
/// convex.
pub fn dented_octahedron() -> Polyhedron {
    let mut p = regular_cross_polytope(3);
    p.coords[2] = dv(&[0.0, 0.0, 0.25]);
    p
}

/// Geodesic octahedron on `S^3`: the `+-e_i` combinatorics pushed onto the
/// sphere of geodesic radius `r` around the pole `(1, 0, 0, 0)`.
pub fn spherical_octahedron(r: f64) -> Polyhedron {
    let complex = Arc::new(cross_polytope_complex(3));
    let base = regular_cross_polytope(3);
    let coords = base
        .coords
        .iter()
        .map(|v| {
            let mut w = DVector::zeros(4);
            w[0] = r.cos();
            for i in 0..3 {
                w[i + 1] = r.sin() * v[i];
            }
            w
        })
        .collect();
    Polyhedron::new(ModelSpace::Sphere(3), complex, coords)
}

/// Geodesic tetrahedron boundary on `S^3` with vertices near the pole,
/// spanned by pole offsets of size `r` along a regular tetrahedron frame.
pub fn spherical_tetrahedron(r: f64) -> Polyhedron {
    let names: Vec<String> = ["p", "q", "s", "t"].iter().map(|s| s.to_string()).collect();
    let facets = vec![
        vec![0usize, 1, 2],
        vec![1, 0, 3],
        vec![2, 1, 3],
        vec![0, 2, 3],
    ];
    let complex = Arc::new(PseudoManifold::build(names, facets).expect("tetrahedron is valid"));
    let dirs = [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ];
    let coords = dirs
        .iter()
        .map(|d| {
            let norm = 3f64.sqrt();
            let mut w = DVector::zeros(4);
            w[0] = r.cos();
            for i in 0..3 {
                w[i + 1] = r.sin() * d[i] / norm;
            }
            w
        })
        .collect();
    Polyhedron::new(ModelSpace::Sphere(3), complex, coords)
}
