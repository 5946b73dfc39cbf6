//! Generalized oriented volume in three geometries, winding numbers with
//! robust retries, Schläfli variation along flexion paths, the flexible
//! spherical bipyramid, and bellows verification reports.
//!
//! The Euclidean volume is the cone sum `sum_F det(x_{v_1}, ..., x_{v_n})/n!`
//! over oriented facets, which equals the integral of the winding-number
//! function by the divergence theorem; the Monte Carlo estimator integrates
//! the winding number directly and serves as the independent cross-check.
//! On the sphere volumes are classes modulo the total volume `sigma_n`,
//! computed against a base point.

use crate::families::{FamilyError, Flexion};
use crate::geomkit::{dihedral_angle, distance, GeomError, ModelSpace, Polyhedron};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("query point lies on the polyhedral surface (within {0:.1e})")]
    OnSurfaceError(f64),
    #[error("winding-number retries exhausted after {0} degenerate probes")]
    RetryExhaustedError(usize),
    #[error("path too coarse for Schläfli integration: angle jump {jump:.3} rad at step {step}")]
    CoarsePathError { step: usize, jump: f64 },
    #[error("degenerate facet: {0}")]
    DegenerateFacetError(String),
    #[error("not realizable: {0}")]
    NotRealizableError(String),
    #[error("unsupported: {0}")]
    UnsupportedError(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

const BOUNDARY_EPS: f64 = 1e-9;
const MAX_RETRIES: usize = 10;

/// Signed cone-sum volume of a Euclidean polyhedron:
/// `sum_F det(x_{v_1}, ..., x_{v_n}) / n!`.
pub fn generalized_volume_euclidean(p: &Polyhedron) -> f64 {
    assert!(p.space.is_euclidean(), "cone sum is Euclidean-only");
    let n = p.space.dim();
    let mut fact = 1.0;
    for i in 1..=n {
        fact *= i as f64;
    }
    let mut total = 0.0;
    for f in p.complex.facets() {
        let mut m = DMatrix::zeros(n, n);
        for (col, &v) in f.iter().enumerate() {
            m.set_column(col, &p.coords[v]);
        }
        total += m.lu().determinant();
    }
    total / fact
}

enum Crossing {
    None,
    Hit(i64),
    Degenerate,
}

/// Crossing of the ray `x + t d` (t > 0) with one Euclidean facet simplex.
fn ray_facet_crossing(
    p: &Polyhedron,
    facet: &[usize],
    x: &DVector<f64>,
    d: &DVector<f64>,
    scale: f64,
) -> Crossing {
    let n = p.space.dim();
    let v0 = &p.coords[facet[0]];
    let mut m = DMatrix::zeros(n, n);
    for col in 1..n {
        m.set_column(col - 1, &(&p.coords[facet[col]] - v0));
    }
    m.set_column(n - 1, &(-d));
    let lu = m.clone().lu();
    let det = lu.determinant();
    if det.abs() < 1e-14 * scale.powi(n as i32 - 1) {
        // Ray parallel to the facet plane (or degenerate facet).
        return Crossing::Degenerate;
    }
    let rhs = x - v0;
    let Some(sol) = lu.solve(&rhs) else {
        return Crossing::Degenerate;
    };
    let t = sol[n - 1];
    let mut bmin = 1.0f64;
    let mut bsum = 0.0f64;
    for i in 0..n - 1 {
        bmin = bmin.min(sol[i]);
        bsum += sol[i];
    }
    bmin = bmin.min(1.0 - bsum);
    if t <= 0.0 && t > -BOUNDARY_EPS * scale && bmin > -BOUNDARY_EPS {
        // Origin of the ray essentially on this facet.
        return Crossing::Degenerate;
    }
    if t <= 0.0 || bmin < -BOUNDARY_EPS {
        return Crossing::None;
    }
    if bmin < BOUNDARY_EPS || t < BOUNDARY_EPS * scale {
        return Crossing::Degenerate;
    }
    // Orientation sign: det[v_2 - v_1, ..., v_n - v_1, d].
    Crossing::Hit(if det < 0.0 { 1 } else { -1 })
}

/// Winding number of a Euclidean polyhedron around `x` by signed ray
/// crossings, with up to ten random re-directions on degenerate hits.
pub fn winding_number(
    p: &Polyhedron,
    x: &DVector<f64>,
    rng: &mut impl Rng,
) -> Result<i64, VolumeError> {
    assert!(p.space.is_euclidean());
    let scale = p.mean_edge().max(1e-12);
    if let Some(dist) = surface_distance_euclidean(p, x) {
        if dist < BOUNDARY_EPS * scale {
            return Err(VolumeError::OnSurfaceError(dist));
        }
    }
    winding_number_unchecked(p, x, rng)
}

/// Ray-crossing winding count without the on-surface proximity test; the
/// Monte Carlo integrators use this fast path (an exactly-on-surface sample
/// is measure zero, and marginal hits still retry and error out).
fn winding_number_unchecked(
    p: &Polyhedron,
    x: &DVector<f64>,
    rng: &mut impl Rng,
) -> Result<i64, VolumeError> {
    let n = p.space.dim();
    let scale = p.mean_edge().max(1e-12);
    'retry: for _ in 0..MAX_RETRIES {
        let mut d = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr_standard()));
        let norm = d.norm();
        if norm < 1e-9 {
            continue;
        }
        d /= norm;
        let mut total = 0i64;
        for f in p.complex.facets() {
            match ray_facet_crossing(p, f, x, &d, scale) {
                Crossing::None => {}
                Crossing::Hit(s) => total += s,
                Crossing::Degenerate => continue 'retry,
            }
        }
        return Ok(total);
    }
    Err(VolumeError::RetryExhaustedError(MAX_RETRIES))
}

fn rand_distr_standard() -> rand::distributions::Uniform<f64> {
    rand::distributions::Uniform::new(-1.0, 1.0)
}

/// Distance from `x` to the nearest facet plane whose in-plane projection
/// lands inside the facet; `None` when no facet is nearby in that sense.
fn surface_distance_euclidean(p: &Polyhedron, x: &DVector<f64>) -> Option<f64> {
    let n = p.space.dim();
    let mut best: Option<f64> = None;
    for f in p.complex.facets() {
        let v0 = &p.coords[f[0]];
        let mut m = DMatrix::zeros(n, n - 1);
        for col in 1..n {
            m.set_column(col - 1, &(&p.coords[f[col]] - v0));
        }
        // Least-squares barycentric projection onto the facet plane.
        let svd = m.clone().svd(true, true);
        let sv_max = svd.singular_values.amax();
        let Ok(beta) = svd.solve(&(x - v0), 1e-12 * sv_max.max(1e-300)) else {
            continue;
        };
        let bsum: f64 = beta.iter().sum();
        let inside = beta.iter().all(|&b| b > -1e-6) && bsum < 1.0 + 1e-6;
        if !inside {
            continue;
        }
        let proj = v0 + &m * &beta;
        let dist = (x - proj).norm();
        best = Some(best.map_or(dist, |b: f64| b.min(dist)));
    }
    best
}

/// Winding number of a spherical polyhedron around `x` with respect to the
/// base point `y`: signed crossings of the geodesic from `x` to `y`.
///
/// The base point is never moved (its region fixes the winding class):
/// degenerate geodesics are retried through a random waypoint `z`, counting
/// crossings along `x -> z -> y`, which represents the same class.
pub fn winding_number_spherical(
    p: &Polyhedron,
    x: &DVector<f64>,
    y: &DVector<f64>,
    rng: &mut impl Rng,
) -> Result<i64, VolumeError> {
    let cache = build_spherical_cache(p)?;
    winding_spherical_cached(p, &cache, x, y, rng)
}

fn winding_spherical_cached(
    p: &Polyhedron,
    cache: &SphericalCache,
    x: &DVector<f64>,
    y: &DVector<f64>,
    rng: &mut impl Rng,
) -> Result<i64, VolumeError> {
    if let Ok(c) = count_crossings_spherical(p, cache, x, y) {
        return Ok(c);
    }
    for _ in 0..MAX_RETRIES {
        let mut z: DVector<f64> = DVector::from_fn(p.space.ambient_dim(), |_, _| {
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        });
        let norm = z.norm();
        if norm < 1e-6 {
            continue;
        }
        z /= norm;
        if let (Ok(a), Ok(b)) = (
            count_crossings_spherical(p, cache, x, &z),
            count_crossings_spherical(p, cache, &z, y),
        ) {
            return Ok(a + b);
        }
    }
    Err(VolumeError::RetryExhaustedError(MAX_RETRIES))
}

struct DegenerateLeg;

/// Precomputed per-facet data for geodesic crossing tests: the span of the
/// facet vertices, its unit normal, and the least-squares pseudo-inverse
/// mapping points to cone coordinates.
struct SphericalCache {
    facets: Vec<SphericalFacet>,
}

struct SphericalFacet {
    span: DMatrix<f64>,
    nu: DVector<f64>,
    pinv: DMatrix<f64>,
}

fn build_spherical_cache(p: &Polyhedron) -> Result<SphericalCache, VolumeError> {
    let ModelSpace::Sphere(n) = p.space else {
        return Err(VolumeError::UnsupportedError(
            "spherical cache needs a sphere model".into(),
        ));
    };
    let ambient = n + 1;
    let mut facets = Vec::with_capacity(p.complex.facets().len());
    for f in p.complex.facets() {
        let mut span = DMatrix::zeros(ambient, n);
        for (col, &v) in f.iter().enumerate() {
            span.set_column(col, &p.coords[v]);
        }
        let nu = crate::geomkit::orthonormal_complement_of(&span).map_err(|_| {
            VolumeError::DegenerateFacetError(format!("facet {f:?} does not span a hyperplane"))
        })?;
        let gram = span.transpose() * &span;
        let pinv = gram
            .lu()
            .try_inverse()
            .ok_or_else(|| {
                VolumeError::DegenerateFacetError(format!("facet {f:?} has singular Gram"))
            })?
            * span.transpose();
        facets.push(SphericalFacet { span, nu, pinv });
    }
    Ok(SphericalCache { facets })
}

/// Signed crossings of the short geodesic from `x` to `y` with the facet
/// cycle; fails on any boundary-marginal hit.
fn count_crossings_spherical(
    p: &Polyhedron,
    cache: &SphericalCache,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<i64, DegenerateLeg> {
    let ModelSpace::Sphere(n) = p.space else {
        return Err(DegenerateLeg);
    };
    let ambient = n + 1;
    let c = x.dot(y).clamp(-1.0, 1.0);
    if c < -1.0 + 1e-9 {
        return Err(DegenerateLeg);
    }
    let theta_total = c.acos();
    if theta_total < 1e-9 {
        return Ok(0);
    }
    let mut e = y - c * x;
    e /= e.norm();
    let mut total = 0i64;
    for facet in cache.facets.iter() {
        let a = x.dot(&facet.nu);
        let b = e.dot(&facet.nu);
        if a.hypot(b) < 1e-12 {
            // Arc inside the facet hyperplane.
            return Err(DegenerateLeg);
        }
        // p(theta) = x cos + e sin crosses <p, nu> = 0 at two antipodal
        // parameters.
        let theta0 = f64::atan2(-a, b);
        for cand in [theta0, theta0 + std::f64::consts::PI] {
            let theta = cand.rem_euclid(2.0 * std::f64::consts::PI);
            if theta <= BOUNDARY_EPS || theta >= theta_total - BOUNDARY_EPS {
                if theta < theta_total + BOUNDARY_EPS {
                    // Close to an endpoint: degenerate when the hit also
                    // lies inside the facet cone.
                    let pt = theta.cos() * x + theta.sin() * &e;
                    let beta = &facet.pinv * &pt;
                    if beta.iter().all(|&b| b > -1e-6) {
                        return Err(DegenerateLeg);
                    }
                }
                continue;
            }
            let pt = theta.cos() * x + theta.sin() * &e;
            let beta = &facet.pinv * &pt;
            let bmin = beta.iter().cloned().fold(f64::INFINITY, f64::min);
            if bmin < -BOUNDARY_EPS {
                continue;
            }
            if bmin < BOUNDARY_EPS {
                return Err(DegenerateLeg);
            }
            // Sign from the frame (w_1, ..., w_n, velocity).
            let vel = -theta.sin() * x + theta.cos() * &e;
            let mut frame = DMatrix::zeros(ambient, ambient);
            frame
                .view_mut((0, 0), (ambient, n))
                .copy_from(&facet.span);
            frame.set_column(ambient - 1, &vel);
            let det = frame.lu().determinant();
            total += if det > 0.0 { 1 } else { -1 };
        }
    }
    Ok(total)
}

/// Rough arc distance from `y` to the image of the polyhedron: minimum over
/// vertex distances and facet-plane distances whose projection lands inside
/// the facet cone.
fn spherical_surface_proximity(p: &Polyhedron, y: &DVector<f64>) -> f64 {
    let ModelSpace::Sphere(n) = p.space else {
        return f64::INFINITY;
    };
    let ambient = n + 1;
    let mut best = f64::INFINITY;
    for c in &p.coords {
        best = best.min(c.dot(y).clamp(-1.0, 1.0).acos());
    }
    for f in p.complex.facets() {
        let mut span = DMatrix::zeros(ambient, n);
        for (col, &v) in f.iter().enumerate() {
            span.set_column(col, &p.coords[v]);
        }
        let Ok(nu) = crate::geomkit::orthonormal_complement_of(&span) else {
            continue;
        };
        let s = y.dot(&nu).clamp(-1.0, 1.0);
        let proj = y - s * &nu;
        let norm = proj.norm();
        if norm < 1e-12 {
            continue;
        }
        let proj = proj / norm;
        if cone_coordinates(&span, &proj).is_some_and(|b| b.iter().all(|&v| v > -1e-9)) {
            best = best.min(s.abs().asin());
        }
    }
    best
}

fn cone_coordinates(span: &DMatrix<f64>, pt: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = span.clone().svd(true, true);
    let sv_max = svd.singular_values.amax();
    svd.solve(pt, 1e-12 * sv_max.max(1e-300)).ok()
}

/// Piecewise-constant winding field of a polyhedron (with base point on the
/// sphere). Evaluations retry with fresh randomness drawn from the seeded
/// generator, so a field instance is deterministic.
pub struct WindingField {
    pub polyhedron: Polyhedron,
    pub base_point: Option<DVector<f64>>,
    rng: ChaCha8Rng,
}

impl WindingField {
    pub fn new(polyhedron: Polyhedron, base_point: Option<DVector<f64>>, seed: u64) -> Self {
        Self {
            polyhedron,
            base_point,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Default spherical base point `(-1, 0, ..., 0)`.
    pub fn default_base_point(space: &ModelSpace) -> DVector<f64> {
        let mut y = DVector::zeros(space.ambient_dim());
        y[0] = -1.0;
        y
    }

    pub fn eval(&mut self, x: &DVector<f64>) -> Result<i64, VolumeError> {
        match self.polyhedron.space {
            ModelSpace::Euclidean(_) => winding_number(&self.polyhedron, x, &mut self.rng),
            ModelSpace::Sphere(_) => {
                let y = self
                    .base_point
                    .clone()
                    .unwrap_or_else(|| Self::default_base_point(&self.polyhedron.space));
                winding_number_spherical(&self.polyhedron, x, &y, &mut self.rng)
            }
            ModelSpace::Hyperbolic(_) => Err(VolumeError::UnsupportedError(
                "winding numbers are implemented for R^n and S^n".into(),
            )),
        }
    }

    /// The field's winding class is fixed by the base point; two fields
    /// over the same polyhedron and base point agree everywhere.
    pub fn base_point_or_default(&self) -> DVector<f64> {
        self.base_point
            .clone()
            .unwrap_or_else(|| Self::default_base_point(&self.polyhedron.space))
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

fn thread_cap() -> usize {
    std::env::var("FLEXILAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
}

const MC_SHARDS: usize = 16;

/// Monte Carlo winding-number volume.
///
/// Euclidean polyhedra are integrated over an inflated bounding box of the
/// vertices; spherical ones over a bounding cap when one smaller than a
/// hemisphere exists, the full sphere otherwise. Sampling is sharded with
/// per-shard seeds derived from `seed` and reduced in fixed order, so the
/// result is deterministic for a fixed seed regardless of thread count.
pub fn monte_carlo_volume(
    p: &Polyhedron,
    base_point: Option<&DVector<f64>>,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, VolumeError> {
    assert!(samples >= 1000, "need at least 10^3 samples");
    match p.space {
        ModelSpace::Euclidean(_) => mc_euclidean(p, samples, seed),
        ModelSpace::Sphere(3) => mc_spherical(p, base_point, samples, seed),
        _ => Err(VolumeError::UnsupportedError(
            "Monte Carlo volume covers R^n and S^3".into(),
        )),
    }
}

enum McDomain {
    Box { lo: DVector<f64>, hi: DVector<f64> },
    Cap { center: DVector<f64>, radius: f64 },
    FullSphere,
}

fn mc_run(
    p: &Polyhedron,
    domain: &McDomain,
    base_point: Option<&DVector<f64>>,
    measure: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, VolumeError> {
    let shard_sizes: Vec<usize> = (0..MC_SHARDS)
        .map(|i| samples / MC_SHARDS + usize::from(i < samples % MC_SHARDS))
        .collect();
    let threads = thread_cap().min(MC_SHARDS).max(1);
    let cache = match p.space {
        ModelSpace::Sphere(_) => Some(build_spherical_cache(p)?),
        _ => None,
    };
    let cache = cache.as_ref();
    let results: Vec<Result<(f64, f64), VolumeError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in 0..threads {
            let shard_sizes = &shard_sizes;
            let base_point = base_point.cloned();
            handles.push(scope.spawn(move || {
                let mut out = Vec::new();
                for shard in (chunk..MC_SHARDS).step_by(threads) {
                    out.push((shard, mc_shard(
                        p,
                        cache,
                        domain,
                        base_point.as_ref(),
                        shard_sizes[shard],
                        seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(shard as u64 + 1)),
                    )));
                }
                out
            }));
        }
        let mut collected: Vec<Option<Result<(f64, f64), VolumeError>>> =
            (0..MC_SHARDS).map(|_| None).collect();
        for h in handles {
            for (shard, r) in h.join().expect("shard thread") {
                collected[shard] = Some(r);
            }
        }
        collected.into_iter().map(|r| r.expect("all shards ran")).collect()
    });
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for r in results {
        let (s, s2) = r?;
        sum += s;
        sum_sq += s2;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(McEstimate {
        value: measure * mean,
        std_error: measure * (var / n).sqrt(),
        samples,
    })
}

fn mc_shard(
    p: &Polyhedron,
    cache: Option<&SphericalCache>,
    domain: &McDomain,
    base_point: Option<&DVector<f64>>,
    count: usize,
    seed: u64,
) -> Result<(f64, f64), VolumeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..count {
        let x = match domain {
            McDomain::Box { lo, hi } => {
                DVector::from_fn(lo.len(), |i, _| rng.gen_range(lo[i]..hi[i]))
            }
            McDomain::Cap { center, radius } => sample_cap_s3(center, *radius, &mut rng),
            McDomain::FullSphere => {
                let mut v: DVector<f64> = DVector::from_fn(p.space.ambient_dim(), |_, _| {
                    let u1: f64 = rng.gen::<f64>().max(1e-300);
                    let u2: f64 = rng.gen();
                    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                });
                v /= v.norm();
                v
            }
        };
        let lambda = match p.space {
            ModelSpace::Euclidean(_) => winding_number_unchecked(p, &x, &mut rng)?,
            ModelSpace::Sphere(_) => {
                let y = match domain {
                    McDomain::Cap { center, .. } => -center.clone(),
                    _ => base_point
                        .cloned()
                        .unwrap_or_else(|| WindingField::default_base_point(&p.space)),
                };
                winding_spherical_cached(p, cache.expect("cache for sphere"), &x, &y, &mut rng)?
            }
            _ => unreachable!(),
        } as f64;
        sum += lambda;
        sum_sq += lambda * lambda;
    }
    Ok((sum, sum_sq))
}

/// Uniform sample of the geodesic cap of radius `rho` about `center` on
/// `S^3`: polar density proportional to `sin^2 theta`.
fn sample_cap_s3(center: &DVector<f64>, rho: f64, rng: &mut impl Rng) -> DVector<f64> {
    let total = rho - rho.sin() * rho.cos();
    let target: f64 = rng.gen::<f64>() * total;
    // Invert F(theta) = theta - sin theta cos theta by bisection.
    let mut lo = 0.0f64;
    let mut hi = rho;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid - mid.sin() * mid.cos() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    // Uniform direction orthogonal to the center.
    let mut w: DVector<f64> = DVector::from_fn(4, |_, _| {
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    });
    w -= center * center.dot(&w);
    w /= w.norm();
    theta.cos() * center + theta.sin() * w
}

fn mc_euclidean(p: &Polyhedron, samples: usize, seed: u64) -> Result<McEstimate, VolumeError> {
    let n = p.space.dim();
    let mut lo = p.coords[0].clone();
    let mut hi = p.coords[0].clone();
    for c in &p.coords {
        for i in 0..n {
            lo[i] = lo[i].min(c[i]);
            hi[i] = hi[i].max(c[i]);
        }
    }
    let diameter = (&hi - &lo).norm().max(1e-9);
    let mut measure = 1.0;
    for i in 0..n {
        let margin = (0.05 * (hi[i] - lo[i])).max(0.01 * diameter);
        lo[i] -= margin;
        hi[i] += margin;
        measure *= hi[i] - lo[i];
    }
    mc_run(p, &McDomain::Box { lo, hi }, None, measure, samples, seed)
}

fn mc_spherical(
    p: &Polyhedron,
    base_point: Option<&DVector<f64>>,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, VolumeError> {
    // Bounding cap, when the polyhedron fits strictly inside a hemisphere.
    let mut center = DVector::zeros(4);
    for c in &p.coords {
        center += c;
    }
    let domain = if center.norm() > 0.1 {
        center /= center.norm();
        let mut radius = 0.0f64;
        for c in &p.coords {
            radius = radius.max(center.dot(c).clamp(-1.0, 1.0).acos());
        }
        radius += 0.05;
        if radius < std::f64::consts::FRAC_PI_2 - 0.05 {
            McDomain::Cap { center, radius }
        } else {
            McDomain::FullSphere
        }
    } else {
        McDomain::FullSphere
    };
    let measure = match &domain {
        McDomain::Cap { radius, .. } => {
            2.0 * std::f64::consts::PI * (radius - radius.sin() * radius.cos())
        }
        _ => ModelSpace::sphere_total_volume(3),
    };
    // The base point is fixed for the whole estimate: the integrand must
    // count crossings against one winding class. The cap estimator relies
    // on lambda vanishing off the cap, so there the antipode of the cap
    // center is used. The default base point is replaced by a seeded random
    // draw when it sits within 1e-6 of the image.
    let y = match &domain {
        McDomain::Cap { center, .. } => -center.clone(),
        _ => {
            let mut y = base_point
                .cloned()
                .unwrap_or_else(|| WindingField::default_base_point(&p.space));
            if spherical_surface_proximity(p, &y) < 1e-6 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
                loop {
                    let mut cand: DVector<f64> = DVector::from_fn(4, |_, _| {
                        let u1: f64 = rng.gen::<f64>().max(1e-300);
                        let u2: f64 = rng.gen();
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    });
                    cand /= cand.norm();
                    if spherical_surface_proximity(p, &cand) > 1e-2 {
                        y = cand;
                        break;
                    }
                }
            }
            y
        }
    };
    let est = mc_run(p, &domain, Some(&y), measure, samples, seed)?;
    Ok(McEstimate {
        value: spherical_representative(est.value),
        ..est
    })
}

/// Canonical representative of a volume class modulo `sigma_3` in
/// `(-sigma_3/2, sigma_3/2]`.
pub fn spherical_representative(v: f64) -> f64 {
    let sigma = ModelSpace::sphere_total_volume(3);
    let mut r = v - sigma * (v / sigma).round();
    if r <= -sigma / 2.0 {
        r += sigma;
    }
    r
}

/// Schläfli variation along a sampled flexion path in `S^n` or `Lambda^n`.
#[derive(Debug, Clone)]
pub struct SchlafliReport {
    /// Total volume change over the path (after one Richardson step when the
    /// sample count allows halving).
    pub delta: f64,
    /// Plain composite-trapezoid total.
    pub delta_trapezoid: f64,
    /// Cumulative volume change after each sample.
    pub cumulative: Vec<f64>,
    /// Largest single `V_F * delta-angle` term in each step.
    pub max_step_term: Vec<f64>,
}

fn wrap_to_pi(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        r = PI;
    }
    r
}

/// Volume of an `(n-2)`-dimensional ridge of a non-Euclidean polyhedron:
/// geodesic length for n = 3, angle excess/defect area for n = 4.
fn ridge_volume(p: &Polyhedron, ridge: &[usize]) -> Result<f64, VolumeError> {
    match (p.space, ridge.len()) {
        (ModelSpace::Sphere(3) | ModelSpace::Hyperbolic(3), 2) => Ok(distance(
            &p.space,
            &p.coords[ridge[0]],
            &p.coords[ridge[1]],
        )?),
        (ModelSpace::Sphere(4) | ModelSpace::Hyperbolic(4), 3) => {
            let l = |i: usize, j: usize| {
                distance(&p.space, &p.coords[ridge[i]], &p.coords[ridge[j]])
            };
            let (a, b, c) = (l(1, 2)?, l(0, 2)?, l(0, 1)?);
            let spherical = matches!(p.space, ModelSpace::Sphere(_));
            let angle = |a: f64, b: f64, c: f64| {
                if spherical {
                    ((a.cos() - b.cos() * c.cos()) / (b.sin() * c.sin()))
                        .clamp(-1.0, 1.0)
                        .acos()
                } else {
                    ((b.cosh() * c.cosh() - a.cosh()) / (b.sinh() * c.sinh()))
                        .clamp(-1.0, 1.0)
                        .acos()
                }
            };
            let sum = angle(a, b, c) + angle(b, c, a) + angle(c, a, b);
            Ok(if spherical {
                sum - std::f64::consts::PI
            } else {
                std::f64::consts::PI - sum
            })
        }
        _ => Err(VolumeError::UnsupportedError(
            "ridge volumes are available for n = 3 and n = 4".into(),
        )),
    }
}

/// Integrate Schläfli's differential along a sampled path:
/// `dV = -1/(n-1) sum_F V_F d(alpha_F)` in hyperbolic space, with the
/// opposite sign on the sphere (validated against the Monte Carlo winding
/// volume on the flexible bipyramid).
pub fn schlafli_variation(path: &[Polyhedron]) -> Result<SchlafliReport, VolumeError> {
    if path.len() < 2 {
        return Err(VolumeError::UnsupportedError(
            "need at least two path samples".into(),
        ));
    }
    let space = path[0].space;
    let n = space.dim();
    let sign = match space {
        ModelSpace::Hyperbolic(_) => -1.0,
        ModelSpace::Sphere(_) => 1.0,
        ModelSpace::Euclidean(_) => {
            return Err(VolumeError::UnsupportedError(
                "Schläfli variation applies to the quadric models".into(),
            ))
        }
    };
    let ridges: Vec<Vec<usize>> = path[0]
        .complex
        .ridges()
        .iter()
        .map(|r| r.vertices.clone())
        .collect();
    // Angle and ridge-volume tables.
    let mut angles = vec![vec![0.0; ridges.len()]; path.len()];
    let mut volumes = vec![vec![0.0; ridges.len()]; path.len()];
    for (s, p) in path.iter().enumerate() {
        for (ri, ridge) in ridges.iter().enumerate() {
            angles[s][ri] = dihedral_angle(p, ridge)
                .map_err(|e| VolumeError::DegenerateFacetError(e.to_string()))?;
            volumes[s][ri] = ridge_volume(p, ridge)?;
        }
    }
    for s in 0..path.len() - 1 {
        for ri in 0..ridges.len() {
            let jump = wrap_to_pi(angles[s + 1][ri] - angles[s][ri]).abs();
            if jump > 0.05 {
                return Err(VolumeError::CoarsePathError { step: s, jump });
            }
        }
    }
    let integrate = |stride: usize| -> f64 {
        let mut total = 0.0;
        let mut s = 0;
        while s + stride < path.len() {
            let t = s + stride;
            for ri in 0..ridges.len() {
                let dalpha = wrap_to_pi(angles[t][ri] - angles[s][ri]);
                total += 0.5 * (volumes[s][ri] + volumes[t][ri]) * dalpha;
            }
            s = t;
        }
        sign / (n as f64 - 1.0) * total
    };
    let full = integrate(1);
    let delta = if path.len() >= 3 && path.len() % 2 == 1 {
        let half = integrate(2);
        (4.0 * full - half) / 3.0
    } else {
        full
    };
    let mut cumulative = vec![0.0];
    let mut max_step_term = Vec::new();
    for s in 0..path.len() - 1 {
        let mut step_total = 0.0;
        let mut max_term = 0.0f64;
        for ri in 0..ridges.len() {
            let dalpha = wrap_to_pi(angles[s + 1][ri] - angles[s][ri]);
            let term = 0.5 * (volumes[s][ri] + volumes[s + 1][ri]) * dalpha;
            step_total += term;
            max_term = max_term.max(term.abs());
        }
        cumulative.push(cumulative[s] + sign / (n as f64 - 1.0) * step_total);
        max_step_term.push(max_term);
    }
    Ok(SchlafliReport {
        delta,
        delta_trapezoid: full,
        cumulative,
        max_step_term,
    })
}

/// Flexible spherical quadrilateral with prescribed side arc-lengths,
/// parametrized by the diagonal `d = dist(v1, v3)`; the vertices live on the
/// unit sphere `S^2` and the area is the angle excess.
#[derive(Debug, Clone)]
pub struct SphericalQuad {
    pub points: [DVector<f64>; 4],
    pub area: f64,
}

pub fn spherical_flexible_quadrilateral(
    sides: [f64; 4],
    d: f64,
) -> Result<SphericalQuad, VolumeError> {
    use std::f64::consts::PI;
    for &l in sides.iter().chain([d].iter()) {
        if !(0.0 < l && l < PI) {
            return Err(VolumeError::NotRealizableError(format!(
                "lengths must lie in (0, pi), got {l}"
            )));
        }
    }
    let tri_ok = |a: f64, b: f64, c: f64| {
        a < b + c && b < a + c && c < a + b && a + b + c < 2.0 * PI
    };
    if !tri_ok(sides[0], sides[1], d) {
        return Err(VolumeError::NotRealizableError(format!(
            "triangle ({}, {}, {d}) violates the spherical triangle inequality",
            sides[0], sides[1]
        )));
    }
    if !tri_ok(sides[2], sides[3], d) {
        return Err(VolumeError::NotRealizableError(format!(
            "triangle ({}, {}, {d}) violates the spherical triangle inequality",
            sides[2], sides[3]
        )));
    }
    let v1 = DVector::from_row_slice(&[0.0, 0.0, 1.0]);
    let v3 = DVector::from_row_slice(&[d.sin(), 0.0, d.cos()]);
    let axis = DVector::from_row_slice(&[0.0, 1.0, 0.0]);
    // v = alpha v1 + beta v3 + gamma axis with prescribed dot products.
    let solve = |cos_to_v1: f64, cos_to_v3: f64, gamma_sign: f64| {
        let det = 1.0 - d.cos() * d.cos();
        let alpha = (cos_to_v1 - d.cos() * cos_to_v3) / det;
        let beta = (cos_to_v3 - d.cos() * cos_to_v1) / det;
        let planar = alpha * &v1 + beta * &v3;
        let g2 = 1.0 - planar.norm_squared();
        if g2 <= 0.0 {
            return Err(VolumeError::NotRealizableError(
                "quadrilateral vertex leaves the sphere".into(),
            ));
        }
        Ok(planar + gamma_sign * g2.sqrt() * &axis)
    };
    let v2 = solve(sides[0].cos(), sides[1].cos(), 1.0)?;
    let v4 = solve(sides[3].cos(), sides[2].cos(), -1.0)?;

    let excess = |a: f64, b: f64, c: f64| {
        let angle = |a: f64, b: f64, c: f64| {
            ((a.cos() - b.cos() * c.cos()) / (b.sin() * c.sin()))
                .clamp(-1.0, 1.0)
                .acos()
        };
        angle(a, b, c) + angle(b, c, a) + angle(c, a, b) - PI
    };
    let area = excess(sides[0], sides[1], d) + excess(sides[2], sides[3], d);
    Ok(SphericalQuad {
        points: [v1, v2, v3, v4],
        area,
    })
}

/// Triangulated bipyramid over a polygon on the equatorial `S^2` inside
/// `S^3`, with apexes at the poles `(+-1, 0, 0, 0)`.
///
/// Flexing the base flexes the suspension with every edge length fixed: the
/// pole-to-base distances are identically `pi/2`.
pub fn suspension_s3(base: &[DVector<f64>]) -> Result<Polyhedron, VolumeError> {
    let k = base.len();
    if k < 3 {
        return Err(VolumeError::NotRealizableError(
            "suspension needs at least a triangle".into(),
        ));
    }
    let mut names = vec!["n".to_string(), "s".to_string()];
    names.extend((1..=k).map(|i| format!("v{i}")));
    let mut facets = Vec::with_capacity(2 * k);
    for i in 0..k {
        let a = 2 + i;
        let b = 2 + (i + 1) % k;
        facets.push(vec![0, a, b]);
        facets.push(vec![b, a, 1]);
    }
    let complex = Arc::new(
        crate::complexes::PseudoManifold::build(names, facets)
            .map_err(|e| VolumeError::NotRealizableError(e.to_string()))?,
    );
    let mut coords = Vec::with_capacity(k + 2);
    coords.push(DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]));
    coords.push(DVector::from_row_slice(&[-1.0, 0.0, 0.0, 0.0]));
    for v in base {
        assert_eq!(v.len(), 3, "base vertices live on the equatorial S^2");
        let mut w = DVector::zeros(4);
        for i in 0..3 {
            w[i + 1] = v[i];
        }
        coords.push(w);
    }
    let p = Polyhedron::new(ModelSpace::Sphere(3), complex, coords);
    for c in &p.coords {
        p.space.check_on_model(c)?;
    }
    Ok(p)
}

/// The flexible-bipyramid family over a spherical quadrilateral with fixed
/// side lengths, parametrized by the diagonal.
pub struct BipyramidFamily {
    pub sides: [f64; 4],
    complex: Arc<crate::complexes::PseudoManifold>,
    space: ModelSpace,
}

impl BipyramidFamily {
    pub fn new(sides: [f64; 4]) -> Result<Self, VolumeError> {
        let probe = Self::feasible_interval(sides)?;
        let quad = spherical_flexible_quadrilateral(sides, 0.5 * (probe.0 + probe.1))?;
        let p = suspension_s3(&quad.points)?;
        Ok(Self {
            sides,
            complex: Arc::clone(&p.complex),
            space: p.space,
        })
    }

    /// Open interval of diagonals for which both triangles exist.
    pub fn feasible_interval(sides: [f64; 4]) -> Result<(f64, f64), VolumeError> {
        let lo = (sides[0] - sides[1]).abs().max((sides[2] - sides[3]).abs());
        let hi = (sides[0] + sides[1])
            .min(sides[2] + sides[3])
            .min(2.0 * std::f64::consts::PI - sides[0] - sides[1])
            .min(2.0 * std::f64::consts::PI - sides[2] - sides[3]);
        if lo >= hi {
            return Err(VolumeError::NotRealizableError(
                "no feasible diagonal".into(),
            ));
        }
        Ok((lo, hi))
    }

    pub fn base_area(&self, d: f64) -> Result<f64, VolumeError> {
        Ok(spherical_flexible_quadrilateral(self.sides, d)?.area)
    }
}

impl Flexion for BipyramidFamily {
    fn space(&self) -> ModelSpace {
        self.space
    }

    fn complex(&self) -> &Arc<crate::complexes::PseudoManifold> {
        &self.complex
    }

    fn eval(&self, d: f64) -> Result<Polyhedron, FamilyError> {
        let quad = spherical_flexible_quadrilateral(self.sides, d)
            .map_err(|e| FamilyError::SpecError(e.to_string()))?;
        suspension_s3(&quad.points).map_err(|e| FamilyError::SpecError(e.to_string()))
    }

    fn default_range(&self) -> (f64, f64) {
        let (lo, hi) = Self::feasible_interval(self.sides).expect("constructed feasible");
        let margin = 0.1 * (hi - lo);
        (lo + margin, hi - margin)
    }
}

/// How to compute the per-sample volume of a bellows report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeMethod {
    ConeSum,
    MonteCarlo { samples: usize, seed: u64 },
    SchlafliDelta,
}

impl VolumeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            VolumeMethod::ConeSum => "cone-sum",
            VolumeMethod::MonteCarlo { .. } => "monte-carlo",
            VolumeMethod::SchlafliDelta => "schlafli-delta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Constant,
    NonConstant,
}

/// Volume-constancy report over a flexion sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeReport {
    pub sweep: Vec<f64>,
    pub volumes: Vec<f64>,
    pub edge_dev: Vec<f64>,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<Vec<f64>>,
}

impl VolumeReport {
    pub fn max_volume_deviation(&self) -> f64 {
        let v0 = self.volumes[0];
        self.volumes
            .iter()
            .map(|v| (v - v0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV rows `(u, V, edge_dev)` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,volume,edge_dev\n");
        for i in 0..self.sweep.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                self.sweep[i], self.volumes[i], self.edge_dev[i]
            ));
        }
        out
    }
}

/// Evaluate a family over a sweep and check whether its volume is constant.
///
/// ```
/// use flexilab::families::fixtures;
/// use flexilab::volumetrics::{bellows_report, Verdict, VolumeMethod};
/// let family = fixtures::rational(3);
/// let report =
///     bellows_report(&family, -1.0, 1.0, 11, VolumeMethod::ConeSum, None).unwrap();
/// assert_eq!(report.verdict, Verdict::Constant);
/// ```
pub fn bellows_report<F: Flexion>(
    family: &F,
    from: f64,
    to: f64,
    steps: usize,
    method: VolumeMethod,
    tolerance: Option<f64>,
) -> Result<VolumeReport, VolumeError> {
    assert!(steps >= 2);
    let sweep: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    let polyhedra: Vec<Polyhedron> = sweep
        .iter()
        .map(|&u| family.eval(u))
        .collect::<Result<_, _>>()?;
    let reference = polyhedra[0].edge_lengths();
    let edge_dev: Vec<f64> = polyhedra
        .iter()
        .map(|p| p.max_edge_deviation(&reference))
        .collect();
    let mut std_errors = None;
    let volumes: Vec<f64> = match method {
        VolumeMethod::ConeSum => {
            if !family.space().is_euclidean() {
                return Err(VolumeError::UnsupportedError(
                    "cone-sum volumes are Euclidean".into(),
                ));
            }
            polyhedra.iter().map(generalized_volume_euclidean).collect()
        }
        VolumeMethod::MonteCarlo { samples, seed } => {
            let mut vols = Vec::with_capacity(polyhedra.len());
            let mut errs = Vec::with_capacity(polyhedra.len());
            for (i, p) in polyhedra.iter().enumerate() {
                let est = monte_carlo_volume(p, None, samples, seed.wrapping_add(i as u64))?;
                vols.push(est.value);
                errs.push(est.std_error);
            }
            std_errors = Some(errs);
            vols
        }
        VolumeMethod::SchlafliDelta => {
            let report = schlafli_variation(&polyhedra)?;
            report.cumulative
        }
    };
    let v0 = volumes[0];
    let (tol, verdict) = match (&std_errors, method) {
        (Some(errs), _) => {
            // Five pooled standard errors of each difference against the
            // first sample.
            let mut ok = true;
            let mut tol_used = 0.0f64;
            for i in 1..volumes.len() {
                let pooled = (errs[0] * errs[0] + errs[i] * errs[i]).sqrt();
                let t = 5.0 * pooled;
                tol_used = tol_used.max(t);
                if (volumes[i] - v0).abs() >= t {
                    ok = false;
                }
            }
            (tol_used, ok)
        }
        (None, VolumeMethod::SchlafliDelta) => {
            let tol = tolerance.unwrap_or(1e-6);
            let ok = volumes.iter().all(|v| (v - v0).abs() < tol);
            (tol, ok)
        }
        (None, _) => {
            let tol = tolerance.unwrap_or(1e-8);
            let ok = volumes
                .iter()
                .all(|v| (v - v0).abs() < tol * (1.0 + v0.abs()));
            (tol, ok)
        }
    };
    Ok(VolumeReport {
        sweep,
        volumes,
        edge_dev,
        verdict: if verdict {
            Verdict::Constant
        } else {
            Verdict::NonConstant
        },
        tolerance: tol,
        method: method.name().to_string(),
        std_errors,
    })
}
