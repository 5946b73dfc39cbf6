//! Metric layer: model spaces, simplex realization, Cayley–Menger
//! determinants, normal-fan frames, dihedral angles, pseudo-linear points.
//!
//! The three model spaces are Euclidean `R^n`, the unit sphere `S^n` in
//! `R^{n+1}`, and the hyperboloid-sheet model of hyperbolic space in
//! `R^{1,n}` with the product `<x,y> = x_0 y_0 - x_1 y_1 - ... - x_n y_n`.
//! Distances satisfy `c(dist(x,y)) = <x,y>` with `c = cos` on the sphere and
//! `c = cosh` in hyperbolic space.

use crate::complexes::PseudoManifold;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// Numerical rank threshold: |lambda| below this times the largest
/// eigenvalue counts as zero.
pub const RANK_EPS: f64 = 1e-9;
/// Tolerance on the model-surface constraint `<x,x> = 1`.
pub const ON_MODEL_EPS: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point is off the model surface: |<x,x>| deviates by {0:.3e}")]
    OffModelError(f64),
    #[error("matrix shape invalid: {0}")]
    ShapeError(String),
    #[error("simplex not realizable: {0}")]
    NotRealizableError(String),
    #[error("degenerate simplex: {0}")]
    DegenerateSimplexError(String),
    #[error("normal Gram matrix has rank {rank}, expected {expected}: {detail}")]
    RankError {
        rank: usize,
        expected: usize,
        detail: String,
    },
    #[error("kernel vector of the normal Gram matrix changes sign: {0}")]
    SignError(String),
    #[error("proper principal minor {0:?} of the normal Gram matrix vanishes")]
    MinorError(Vec<usize>),
    #[error("degenerate facet at ridge computation: {0}")]
    DegenerateFacetError(String),
    #[error("pseudo-linear combination has non-positive norm {0:.3e}")]
    NullCombinationError(f64),
    #[error("ridge {0:?} not found in the complex")]
    RidgeNotFound(Vec<usize>),
    #[error("operation requires a non-Euclidean model space")]
    EuclideanSpace,
}

/// Constant-curvature model space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelSpace {
    Euclidean(usize),
    Sphere(usize),
    Hyperbolic(usize),
}

impl ModelSpace {
    /// Geometric dimension n.
    pub fn dim(&self) -> usize {
        match *self {
            ModelSpace::Euclidean(n) | ModelSpace::Sphere(n) | ModelSpace::Hyperbolic(n) => n,
        }
    }

    /// Dimension of the ambient coordinate vector (n, or n+1 for the
    /// quadric models).
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ModelSpace::Euclidean(n) => n,
            ModelSpace::Sphere(n) | ModelSpace::Hyperbolic(n) => n + 1,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, ModelSpace::Euclidean(_))
    }

    /// Ambient bilinear form.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match self {
            ModelSpace::Euclidean(_) | ModelSpace::Sphere(_) => x.dot(y),
            ModelSpace::Hyperbolic(_) => {
                let mut s = x[0] * y[0];
                for i in 1..x.len() {
                    s -= x[i] * y[i];
                }
                s
            }
        }
    }

    /// c(t): cos on the sphere, cosh in hyperbolic space.
    pub fn c(&self, t: f64) -> f64 {
        match self {
            ModelSpace::Euclidean(_) => panic!("c(t) is defined for the quadric models only"),
            ModelSpace::Sphere(_) => t.cos(),
            ModelSpace::Hyperbolic(_) => t.cosh(),
        }
    }

    /// Deviation from the model surface; zero for Euclidean space.
    pub fn surface_residual(&self, x: &DVector<f64>) -> f64 {
        match self {
            ModelSpace::Euclidean(_) => 0.0,
            _ => (self.inner(x, x) - 1.0).abs(),
        }
    }

    pub fn check_on_model(&self, x: &DVector<f64>) -> Result<(), GeomError> {
        let r = self.surface_residual(x);
        if r > ON_MODEL_EPS {
            return Err(GeomError::OffModelError(r));
        }
        if let ModelSpace::Hyperbolic(_) = self {
            if x[0] <= 0.0 {
                return Err(GeomError::OffModelError(x[0]));
            }
        }
        Ok(())
    }

    /// Total n-dimensional volume of the model sphere S^n.
    pub fn sphere_total_volume(n: usize) -> f64 {
        use std::f64::consts::PI;
        if n.is_multiple_of(2) {
            // 2^{m+1} pi^m / (2m-1)!! with n = 2m
            let m = n / 2;
            let mut dfact = 1.0;
            let mut i = 1;
            while i < 2 * m {
                if (i) % 2 == 1 {
                    dfact *= i as f64;
                }
                i += 1;
            }
            2f64.powi(m as i32 + 1) * PI.powi(m as i32) / dfact
        } else {
            // 2 pi^{m+1} / m! with n = 2m+1
            let m = (n - 1) / 2;
            let mut fact = 1.0;
            for i in 1..=m {
                fact *= i as f64;
            }
            2.0 * PI.powi(m as i32 + 1) / fact
        }
    }
}

/// Geodesic distance between two points of the model space.
pub fn distance(space: &ModelSpace, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64, GeomError> {
    match space {
        ModelSpace::Euclidean(_) => Ok((x - y).norm()),
        ModelSpace::Sphere(_) => {
            space.check_on_model(x)?;
            space.check_on_model(y)?;
            Ok(x.dot(y).clamp(-1.0, 1.0).acos())
        }
        ModelSpace::Hyperbolic(_) => {
            space.check_on_model(x)?;
            space.check_on_model(y)?;
            Ok(space.inner(x, y).max(1.0).acosh())
        }
    }
}

/// Bordered Cayley–Menger determinant of a squared-distance matrix.
///
/// For p points the determinant vanishes whenever the points embed in
/// dimension at most p-2; for a non-degenerate d-simplex with p = d+1
/// vertices it equals `(-1)^{d+1} 2^d (d!)^2 V^2`.
pub fn cayley_menger_det(sq_dists: &DMatrix<f64>) -> Result<f64, GeomError> {
    let p = sq_dists.nrows();
    if sq_dists.ncols() != p {
        return Err(GeomError::ShapeError(format!(
            "{}x{} matrix is not square",
            p,
            sq_dists.ncols()
        )));
    }
    let scale = sq_dists.amax().max(1.0);
    for i in 0..p {
        if sq_dists[(i, i)].abs() > 1e-12 * scale {
            return Err(GeomError::ShapeError(format!("diagonal entry ({i},{i}) nonzero")));
        }
        for j in 0..p {
            if (sq_dists[(i, j)] - sq_dists[(j, i)]).abs() > 1e-9 * scale {
                return Err(GeomError::ShapeError(format!("entry ({i},{j}) asymmetric")));
            }
        }
    }
    let mut b = DMatrix::zeros(p + 1, p + 1);
    for j in 1..=p {
        b[(0, j)] = 1.0;
        b[(j, 0)] = 1.0;
    }
    for i in 0..p {
        for j in 0..p {
            b[(i + 1, j + 1)] = sq_dists[(i, j)];
        }
    }
    Ok(b.lu().determinant())
}

/// Realize a p-point simplex with prescribed edge lengths in a model space.
///
/// The construction is a sequential orthogonalization: the first vertex sits
/// at the canonical anchor (origin, or the pole `(1,0,...,0)` of the quadric
/// models) and each further vertex adds one coordinate axis, so the output
/// frame is deterministic.
pub fn realize_simplex_from_lengths(
    lengths: &DMatrix<f64>,
    space: &ModelSpace,
) -> Result<Vec<DVector<f64>>, GeomError> {
    let p = lengths.nrows();
    if lengths.ncols() != p || p == 0 {
        return Err(GeomError::ShapeError("lengths matrix must be square and nonempty".into()));
    }
    for i in 0..p {
        for j in 0..p {
            if (lengths[(i, j)] - lengths[(j, i)]).abs() > 1e-12 {
                return Err(GeomError::ShapeError(format!("lengths ({i},{j}) asymmetric")));
            }
            if i != j && lengths[(i, j)] <= 0.0 {
                return Err(GeomError::NotRealizableError(format!(
                    "edge ({i},{j}) has non-positive length"
                )));
            }
        }
    }
    let ambient = space.ambient_dim();
    match space {
        ModelSpace::Euclidean(n) => {
            if p > n + 1 {
                return Err(GeomError::ShapeError(format!(
                    "{p} points exceed a simplex in R^{n}"
                )));
            }
            // Gram matrix relative to the first vertex.
            let q = p - 1;
            let mut b = DMatrix::zeros(q, q);
            for i in 0..q {
                for j in 0..q {
                    let d0i = lengths[(0, i + 1)].powi(2);
                    let d0j = lengths[(0, j + 1)].powi(2);
                    let dij = lengths[(i + 1, j + 1)].powi(2);
                    b[(i, j)] = 0.5 * (d0i + d0j - dij);
                }
            }
            let l = cholesky_with_diagnostics(&b)?;
            let mut out = vec![DVector::zeros(ambient)];
            for i in 0..q {
                let mut v = DVector::zeros(ambient);
                for j in 0..q.min(ambient) {
                    v[j] = l[(i, j)];
                }
                out.push(v);
            }
            Ok(out)
        }
        ModelSpace::Sphere(n) | ModelSpace::Hyperbolic(n) => {
            if p > n + 1 {
                return Err(GeomError::ShapeError(format!(
                    "{p} points exceed a simplex in a model space of dimension {n}"
                )));
            }
            if let ModelSpace::Sphere(_) = space {
                for i in 0..p {
                    for j in i + 1..p {
                        if lengths[(i, j)] >= std::f64::consts::PI {
                            return Err(GeomError::NotRealizableError(format!(
                                "spherical edge ({i},{j}) not shorter than pi"
                            )));
                        }
                    }
                }
            }
            let mut g = DMatrix::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    g[(i, j)] = if i == j { 1.0 } else { space.c(lengths[(i, j)]) };
                }
            }
            // New-direction metric sign: +1 on the sphere, -1 for the
            // spacelike axes of the hyperboloid model.
            let s = if matches!(space, ModelSpace::Sphere(_)) {
                1.0
            } else {
                -1.0
            };
            let mut coords: Vec<DVector<f64>> = Vec::with_capacity(p);
            let mut e0 = DVector::zeros(ambient);
            e0[0] = 1.0;
            coords.push(e0);
            for k in 1..p {
                let gk = g.view((0, 0), (k, k)).into_owned();
                let rhs = DVector::from_fn(k, |i, _| g[(k, i)]);
                let c = gk
                    .lu()
                    .solve(&rhs)
                    .ok_or_else(|| GeomError::NotRealizableError(format!(
                        "leading {k}x{k} Gram block singular"
                    )))?;
                let mu = rhs.dot(&c);
                let beta2 = s * (1.0 - mu);
                if beta2 <= 1e-12 {
                    return Err(GeomError::NotRealizableError(format!(
                        "Gram condition fails at vertex {k}: beta^2 = {beta2:.3e}"
                    )));
                }
                let mut x = DVector::zeros(ambient);
                for (i, ci) in c.iter().enumerate() {
                    x += *ci * &coords[i];
                }
                x[k] += beta2.sqrt();
                coords.push(x);
            }
            Ok(coords)
        }
    }
}

fn cholesky_with_diagnostics(b: &DMatrix<f64>) -> Result<DMatrix<f64>, GeomError> {
    let q = b.nrows();
    let scale = b.diagonal().amax().max(1e-300);
    let mut l = DMatrix::zeros(q, q);
    for j in 0..q {
        let mut d = b[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= RANK_EPS * scale {
            return Err(GeomError::NotRealizableError(format!(
                "leading minor {} not positive (pivot {d:.3e})",
                j + 1
            )));
        }
        l[(j, j)] = d.sqrt();
        for i in j + 1..q {
            let mut v = b[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / l[(j, j)];
        }
    }
    Ok(l)
}

/// Altitudes, interior facet normals, and hyperplane normal of an
/// (n-1)-simplex spanned by n vertices in R^n.
#[derive(Debug, Clone)]
pub struct SimplexFrame {
    pub vertices: Vec<DVector<f64>>,
    pub altitudes: Vec<f64>,
    /// Interior unit normals to the facets, inside the simplex hyperplane.
    pub normals: Vec<DVector<f64>>,
    /// Unit normal to the simplex hyperplane, oriented so that
    /// (a_2 - a_1, ..., a_n - a_1, m) is a positive frame.
    pub hyperplane_normal: DVector<f64>,
    pub gram: DMatrix<f64>,
}

/// Unit vector orthogonal to the column space of `cols` (which must have
/// corank exactly one), chosen deterministically.
pub(crate) fn orthonormal_complement_of(cols: &DMatrix<f64>) -> Result<DVector<f64>, GeomError> {
    orthonormal_complement(cols)
}

fn orthonormal_complement(cols: &DMatrix<f64>) -> Result<DVector<f64>, GeomError> {
    let n = cols.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(cols.ncols());
    for c in 0..cols.ncols() {
        let mut v = cols.column(c).clone_owned();
        for b in &basis {
            v -= v.dot(b) * b;
        }
        let nrm = v.norm();
        if nrm > 1e-12 {
            basis.push(v / nrm);
        }
    }
    let mut best: Option<DVector<f64>> = None;
    let mut best_norm = 0.0;
    for axis in 0..n {
        let mut v = DVector::zeros(n);
        v[axis] = 1.0;
        for b in &basis {
            let proj = v.dot(b);
            v -= proj * b;
        }
        let nrm = v.norm();
        if nrm > best_norm {
            best_norm = nrm;
            best = Some(v / nrm);
        }
    }
    best.filter(|_| best_norm > 1e-9)
        .ok_or_else(|| GeomError::DegenerateSimplexError("no orthogonal complement".into()))
}

/// Compute the frame data of the (n-1)-simplex spanned by `vertices`.
pub fn simplex_frame(vertices: &[DVector<f64>]) -> Result<SimplexFrame, GeomError> {
    let n = vertices.len();
    if n < 2 {
        return Err(GeomError::ShapeError("a simplex needs at least 2 vertices".into()));
    }
    let ambient = vertices[0].len();
    if ambient != n {
        return Err(GeomError::ShapeError(format!(
            "{n} vertices must live in R^{n}, got R^{ambient}"
        )));
    }
    // Orthonormal basis of the simplex hyperplane.
    let mut d = DMatrix::zeros(n, n - 1);
    for j in 1..n {
        d.set_column(j - 1, &(&vertices[j] - &vertices[0]));
    }
    let qr = d.clone().qr();
    let basis = qr.q();
    let r = qr.r();
    let scale = vertices
        .iter()
        .map(|v| v.norm())
        .fold(1.0f64, f64::max);
    for i in 0..n - 1 {
        if r[(i, i)].abs() < 1e-12 * scale {
            return Err(GeomError::DegenerateSimplexError(format!(
                "edge vectors have rank < {} (pivot {})",
                n - 1,
                i
            )));
        }
    }
    let mut m = orthonormal_complement(&basis)?;
    // Orientation: (a_2 - a_1, ..., a_n - a_1, m) positive.
    let mut full = DMatrix::zeros(n, n);
    for j in 0..n - 1 {
        full.set_column(j, &d.column(j).clone_owned());
    }
    full.set_column(n - 1, &m);
    if full.lu().determinant() < 0.0 {
        m = -m;
    }

    // Plane coordinates of the vertices.
    let plane: Vec<DVector<f64>> = vertices
        .iter()
        .map(|v| basis.transpose() * (v - &vertices[0]))
        .collect();

    let mut normals_plane = Vec::with_capacity(n);
    let mut altitudes = Vec::with_capacity(n);
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let base = others[0];
        let mut f = DMatrix::zeros(n - 1, n.saturating_sub(2));
        for (col, &j) in others[1..].iter().enumerate() {
            f.set_column(col, &(&plane[j] - &plane[base]));
        }
        let mut nu = if n == 2 {
            // 1-dimensional plane space; the facet is a point.
            DVector::from_element(1, 1.0)
        } else {
            orthonormal_complement(&f)?
        };
        let toward = &plane[i] - &plane[base];
        let h = nu.dot(&toward);
        if h.abs() < 1e-12 * scale.max(1.0) {
            return Err(GeomError::DegenerateSimplexError(format!(
                "vertex {i} lies on its opposite facet"
            )));
        }
        if h < 0.0 {
            nu = -nu;
        }
        altitudes.push(h.abs());
        normals_plane.push(nu);
    }
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = normals_plane[i].dot(&normals_plane[j]);
        }
    }
    let normals: Vec<DVector<f64>> = normals_plane.iter().map(|nu| &basis * nu).collect();
    Ok(SimplexFrame {
        vertices: vertices.to_vec(),
        altitudes,
        normals,
        hyperplane_normal: m,
        gram,
    })
}

/// Reconstruct a simplex frame (up to similarity) from the Gram matrix of
/// its interior facet normals.
///
/// `G` must be degenerate positive semidefinite of rank n-1 with all proper
/// principal minors nonzero and a one-signed kernel vector (the facet
/// measures). The output is normalized so the smallest altitude is 1, the
/// incenter sits at the origin of the hyperplane, and the hyperplane is the
/// coordinate slice `x_n = 0`.
pub fn realize_from_normal_gram(g: &DMatrix<f64>) -> Result<SimplexFrame, GeomError> {
    let n = g.nrows();
    if g.ncols() != n || n < 2 {
        return Err(GeomError::ShapeError("Gram matrix must be square, n >= 2".into()));
    }
    for i in 0..n {
        if (g[(i, i)] - 1.0).abs() > 1e-9 {
            return Err(GeomError::ShapeError(format!("diagonal entry {i} is not 1")));
        }
        for j in 0..n {
            if (g[(i, j)] - g[(j, i)]).abs() > 1e-9 {
                return Err(GeomError::ShapeError(format!("entry ({i},{j}) asymmetric")));
            }
        }
    }
    let sym = nalgebra::SymmetricEigen::new(g.clone());
    let lambda_max = sym.eigenvalues.amax();
    let mut zero_count = 0;
    let mut kernel_idx = 0;
    for (i, &ev) in sym.eigenvalues.iter().enumerate() {
        if ev.abs() < RANK_EPS * lambda_max {
            zero_count += 1;
            kernel_idx = i;
        } else if ev < 0.0 {
            return Err(GeomError::RankError {
                rank: n - zero_count,
                expected: n - 1,
                detail: format!("negative eigenvalue {ev:.3e}"),
            });
        }
    }
    if zero_count != 1 {
        return Err(GeomError::RankError {
            rank: n - zero_count,
            expected: n - 1,
            detail: format!("eigenvalues {:?}", sym.eigenvalues.as_slice()),
        });
    }
    // Proper principal minors must be nonzero.
    let subsets = proper_subsets(n);
    for sub in &subsets {
        let m = sub.len();
        let mut gs = DMatrix::zeros(m, m);
        for (a, &i) in sub.iter().enumerate() {
            for (b, &j) in sub.iter().enumerate() {
                gs[(a, b)] = g[(i, j)];
            }
        }
        if gs.lu().determinant().abs() < RANK_EPS {
            return Err(GeomError::MinorError(sub.clone()));
        }
    }
    // Kernel vector: the facet measures up to scale, one strict sign.
    let kernel = sym.eigenvectors.column(kernel_idx).clone_owned();
    let kmax = kernel.amax();
    let first_sign = kernel[0].signum();
    for (i, &s) in kernel.iter().enumerate() {
        if s.abs() < RANK_EPS * kmax || s.signum() != first_sign {
            return Err(GeomError::SignError(format!(
                "kernel entry {i} = {s:.3e} (entries must share one strict sign)"
            )));
        }
    }

    // Normals: Cholesky of the leading (n-1) block gives nu_1..nu_{n-1};
    // the last one solves L y = g[.., n-1].
    let lead = g.view((0, 0), (n - 1, n - 1)).into_owned();
    let l = cholesky_with_diagnostics(&lead)?;
    let mut normals_plane: Vec<DVector<f64>> = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let mut nu = DVector::zeros(n - 1);
        for j in 0..=i {
            nu[j] = l[(i, j)];
        }
        normals_plane.push(nu);
    }
    let rhs = DVector::from_fn(n - 1, |i, _| g[(i, n - 1)]);
    let mut y = DVector::zeros(n - 1);
    for i in 0..n - 1 {
        let mut v = rhs[i];
        for j in 0..i {
            v -= l[(i, j)] * y[j];
        }
        y[i] = v / l[(i, i)];
    }
    normals_plane.push(y);

    // Vertices from the supporting hyperplanes <nu_j, x> = -1 (incenter at
    // the origin, inradius 1 before rescaling).
    let mut plane_vertices: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut altitudes = Vec::with_capacity(n);
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let mut mat = DMatrix::zeros(n - 1, n - 1);
        for (row, &j) in others.iter().enumerate() {
            mat.set_row(row, &normals_plane[j].transpose());
        }
        let rhs = DVector::from_element(n - 1, -1.0);
        let x = mat.lu().solve(&rhs).ok_or_else(|| {
            GeomError::MinorError(others.clone())
        })?;
        let a = normals_plane[i].dot(&x) + 1.0;
        if a <= 0.0 {
            return Err(GeomError::SignError(format!(
                "altitude {i} non-positive ({a:.3e})"
            )));
        }
        altitudes.push(a);
        plane_vertices.push(x);
    }
    let scale = 1.0 / altitudes.iter().cloned().fold(f64::INFINITY, f64::min);
    for v in &mut plane_vertices {
        *v *= scale;
    }
    for a in &mut altitudes {
        *a *= scale;
    }

    // Lift into R^n with the hyperplane at x_n = 0.
    let lift = |v: &DVector<f64>| {
        let mut w = DVector::zeros(n);
        for i in 0..n - 1 {
            w[i] = v[i];
        }
        w
    };
    let vertices: Vec<DVector<f64>> = plane_vertices.iter().map(&lift).collect();
    let normals: Vec<DVector<f64>> = normals_plane.iter().map(&lift).collect();
    let mut m = DVector::zeros(n);
    m[n - 1] = 1.0;
    let mut full = DMatrix::zeros(n, n);
    for j in 1..n {
        full.set_column(j - 1, &(&vertices[j] - &vertices[0]));
    }
    full.set_column(n - 1, &m);
    if full.lu().determinant() < 0.0 {
        m[n - 1] = -1.0;
    }
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = normals[i].dot(&normals[j]);
        }
    }
    Ok(SimplexFrame {
        vertices,
        altitudes,
        normals,
        hyperplane_normal: m,
        gram,
    })
}

fn proper_subsets(n: usize) -> Vec<Vec<usize>> {
    assert!(n <= 16, "principal-minor enumeration capped at n = 16");
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        let sub: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        out.push(sub);
    }
    out
}

/// Normalized pseudo-linear combination of simplex vertices on a quadric
/// model surface.
pub fn pseudo_linear_point(
    space: &ModelSpace,
    vertices: &[DVector<f64>],
    weights: &[f64],
) -> Result<DVector<f64>, GeomError> {
    if space.is_euclidean() {
        return Err(GeomError::EuclideanSpace);
    }
    assert_eq!(vertices.len(), weights.len());
    let wsum: f64 = weights.iter().sum();
    if (wsum - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < -1e-12) {
        return Err(GeomError::ShapeError(
            "weights must be nonnegative and sum to 1".into(),
        ));
    }
    let mut c = DVector::zeros(space.ambient_dim());
    for (v, &w) in vertices.iter().zip(weights) {
        c += w * v;
    }
    let q = space.inner(&c, &c);
    if q <= 1e-12 {
        return Err(GeomError::NullCombinationError(q));
    }
    Ok(c / q.sqrt())
}

/// A vertex-coordinate assignment for a pseudo-manifold in a model space.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub space: ModelSpace,
    pub complex: Arc<PseudoManifold>,
    pub coords: Vec<DVector<f64>>,
}

impl Polyhedron {
    pub fn new(
        space: ModelSpace,
        complex: Arc<PseudoManifold>,
        coords: Vec<DVector<f64>>,
    ) -> Self {
        assert_eq!(coords.len(), complex.vertex_count());
        Self {
            space,
            complex,
            coords,
        }
    }

    pub fn edge_length(&self, u: usize, v: usize) -> f64 {
        distance(&self.space, &self.coords[u], &self.coords[v])
            .expect("coordinates on the model surface")
    }

    /// Edge lengths in the complex's canonical edge order.
    pub fn edge_lengths(&self) -> Vec<f64> {
        self.complex
            .edges()
            .iter()
            .map(|&(u, v)| self.edge_length(u, v))
            .collect()
    }

    /// Largest relative deviation of the current edge lengths from
    /// `reference` (same order as [`Self::edge_lengths`]).
    pub fn max_edge_deviation(&self, reference: &[f64]) -> f64 {
        self.edge_lengths()
            .iter()
            .zip(reference)
            .map(|(l, r)| (l - r).abs() / r.abs().max(1e-300))
            .fold(0.0, f64::max)
    }

    pub fn facet_coords(&self, facet: usize) -> Vec<DVector<f64>> {
        self.complex.facets()[facet]
            .iter()
            .map(|&v| self.coords[v].clone())
            .collect()
    }

    /// (n-1)-dimensional Euclidean measure of a facet simplex (for the
    /// quadric models this is the measure of the chord simplex, which is
    /// what the degeneracy monitor needs).
    pub fn facet_measure(&self, facet: usize) -> f64 {
        let pts = self.facet_coords(facet);
        let k = pts.len() - 1;
        let mut d = DMatrix::zeros(pts[0].len(), k);
        for j in 1..pts.len() {
            d.set_column(j - 1, &(&pts[j] - &pts[0]));
        }
        let g = d.transpose() * &d;
        let det = g.lu().determinant().max(0.0);
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
        }
        det.sqrt() / fact
    }

    /// Mean edge length.
    pub fn mean_edge(&self) -> f64 {
        let l = self.edge_lengths();
        l.iter().sum::<f64>() / l.len() as f64
    }

    pub fn translated(&self, shift: &DVector<f64>) -> Self {
        assert!(self.space.is_euclidean());
        Self {
            space: self.space,
            complex: Arc::clone(&self.complex),
            coords: self.coords.iter().map(|c| c + shift).collect(),
        }
    }

    /// Same geometry on the orientation-reversed complex.
    pub fn reversed(&self) -> Self {
        Self {
            space: self.space,
            complex: Arc::new(self.complex.reversed()),
            coords: self.coords.clone(),
        }
    }
}

/// Tangent vector at `p` pointing toward `w` (not normalized).
fn tangent_toward(space: &ModelSpace, p: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    match space {
        ModelSpace::Euclidean(_) => w - p,
        ModelSpace::Sphere(_) | ModelSpace::Hyperbolic(_) => w - space.inner(w, p) * p,
    }
}

/// Positive-definite metric on the tangent space.
fn tangent_dot(space: &ModelSpace, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    match space {
        ModelSpace::Euclidean(_) | ModelSpace::Sphere(_) => x.dot(y),
        ModelSpace::Hyperbolic(_) => -space.inner(x, y),
    }
}

/// Interior dihedral angle of `p` at an (n-2)-dimensional ridge, in (0, 2pi).
///
/// The angle is measured on the side selected by the facet orientations;
/// reversing the global orientation maps it to `2pi - angle`. For the
/// quadric models the computation happens in the tangent space at the ridge
/// barycenter.
pub fn dihedral_angle(p: &Polyhedron, ridge_vertices: &[usize]) -> Result<f64, GeomError> {
    let ridge = p
        .complex
        .ridge(ridge_vertices)
        .ok_or_else(|| GeomError::RidgeNotFound(ridge_vertices.to_vec()))?;
    let n = p.space.dim();
    if n < 3 {
        return Err(GeomError::ShapeError("dihedral angles need n >= 3".into()));
    }
    let f1 = &p.complex.facets()[ridge.facets[0]];
    let f2 = &p.complex.facets()[ridge.facets[1]];

    // Barycenter of the ridge.
    let bary = match p.space {
        ModelSpace::Euclidean(_) => {
            let mut c = DVector::zeros(p.space.ambient_dim());
            for &v in &ridge.vertices {
                c += &p.coords[v];
            }
            c / ridge.vertices.len() as f64
        }
        _ => {
            let pts: Vec<DVector<f64>> = ridge.vertices.iter().map(|&v| p.coords[v].clone()).collect();
            let w = vec![1.0 / pts.len() as f64; pts.len()];
            pseudo_linear_point(&p.space, &pts, &w)?
        }
    };

    // Ridge tuple as induced by the first facet: remove the apex, swap the
    // first two entries when the boundary sign is negative.
    let apex1 = *f1
        .iter()
        .find(|v| !ridge.vertices.contains(v))
        .expect("facet exceeds ridge by one vertex");
    let apex2 = *f2
        .iter()
        .find(|v| !ridge.vertices.contains(v))
        .expect("facet exceeds ridge by one vertex");
    let pos = f1.iter().position(|&v| v == apex1).unwrap();
    let mut tuple: Vec<usize> = f1.iter().cloned().filter(|&v| v != apex1).collect();
    if pos % 2 == 1 {
        tuple.swap(0, 1);
    }

    let t = |w: usize| tangent_toward(&p.space, &bary, &p.coords[w]);
    let ridge_dirs: Vec<DVector<f64>> = (1..tuple.len())
        .map(|j| t(tuple[j]) - t(tuple[0]))
        .collect();

    // Orthonormal basis of the ridge direction space in the tangent metric.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for d in &ridge_dirs {
        let mut v = d.clone();
        for b in &basis {
            v -= tangent_dot(&p.space, &v, b) * b;
        }
        let nrm = tangent_dot(&p.space, &v, &v).max(0.0).sqrt();
        if nrm < 1e-12 {
            return Err(GeomError::DegenerateFacetError(
                "ridge directions are linearly dependent".into(),
            ));
        }
        basis.push(v / nrm);
    }
    let perp = |w: usize| -> Result<DVector<f64>, GeomError> {
        let mut v = t(w);
        for b in &basis {
            v -= tangent_dot(&p.space, &v, b) * b;
        }
        let nrm = tangent_dot(&p.space, &v, &v).max(0.0).sqrt();
        if nrm < 1e-12 {
            return Err(GeomError::DegenerateFacetError(format!(
                "apex {w} lies in the ridge plane"
            )));
        }
        Ok(v / nrm)
    };
    let u = perp(apex1)?;
    let v = perp(apex2)?;

    // Signed rotation from u to v about the oriented ridge.
    let cols_n = p.space.ambient_dim();
    let mut mat = DMatrix::zeros(cols_n, cols_n);
    let mut col = 0;
    if !p.space.is_euclidean() {
        mat.set_column(col, &bary);
        col += 1;
    }
    for d in &ridge_dirs {
        mat.set_column(col, d);
        col += 1;
    }
    mat.set_column(col, &u);
    mat.set_column(col + 1, &v);
    let det = mat.lu().determinant();
    let c = tangent_dot(&p.space, &u, &v).clamp(-1.0, 1.0);
    // |sin| via the orthogonal component of v against u; unlike
    // sqrt(1 - c^2) this stays fully accurate at nearly flat ridges.
    let v_perp = &v - c * &u;
    let s = det.signum() * tangent_dot(&p.space, &v_perp, &v_perp).max(0.0).sqrt();
    let angle = (-f64::atan2(s, c)).rem_euclid(2.0 * std::f64::consts::PI);
    Ok(angle)
}
