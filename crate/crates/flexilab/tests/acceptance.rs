//! Acceptance suite: one test per top-level claim, each printing a PASS
//! line with the measured figure next to its pinned threshold.

use flexilab::complexes::{cross_polytope_complex, Involution, SymmetryKind};
use flexilab::confspace::{
    configuration_residual, rigidity_test, symmetry_reduce, system_from_configuration, track_flex,
    EdgeLengths, TrackOptions, VarietySystem,
};
use flexilab::elliptica::{biquad_coefficients, jacobi, quarter_period};
use flexilab::families::{
    fixed_simplex_ridges, fixtures, normalize_tangents, perpendicular_bisector_deviation,
    sweep_family, tangent_profile, FlexFamily, Flexion,
};
use flexilab::geomkit::{ModelSpace, Polyhedron};
use flexilab::shapes;
use flexilab::volumetrics::{
    bellows_report, generalized_volume_euclidean, monte_carlo_volume, schlafli_variation,
    BipyramidFamily, Verdict, VolumeMethod,
};
use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

fn pass(criterion: u32, what: &str, measured: &str) {
    println!("acceptance {criterion:02} PASS: {what} ({measured})");
}

#[test]
fn criterion_01_rational_families_flex() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 3..=6 {
        let fam = fixtures::rational(n);
        let sweep = sweep_family(&fam, -1.4, 1.8, 81).unwrap();
        worst = worst.max(sweep.max_edge_deviation());
        assert!(
            sweep.max_edge_deviation() < 1e-9,
            "n={n}: edge deviation {}",
            sweep.max_edge_deviation()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
    pass(
        1,
        "rational cross-polytope flexions for n = 3..6 keep edge lengths",
        &format!("max relative deviation {worst:.2e} < 1e-9, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_tangent_proportionality() {
    let mut worst = 0.0f64;
    for n in [3usize, 4] {
        let fam = fixtures::rational(n);
        let ridges = fixed_simplex_ridges(n);
        let us: Vec<f64> = (0..33).map(|i| 0.15 + 1.8 * i as f64 / 32.0).collect();
        let profile = tangent_profile(&fam, &ridges, &us).unwrap();
        for (ri, col) in profile.values.iter().enumerate() {
            let (_, _, dev) = normalize_tangents(&us, col).unwrap();
            worst = worst.max(dev);
            assert!(dev < 1e-8, "n={n} ridge {ri}: deviation {dev}");
        }
    }
    pass(
        2,
        "skew-family half-angle tangents are proportional to the parameter",
        &format!("max t_i(u)/u spread {worst:.2e} < 1e-8, n = 3 and 4"),
    );
}

#[test]
fn criterion_03_elliptic_machinery() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst_pyth = 0.0f64;
    for _ in 0..10_000 {
        let u = rng.gen_range(-12.0..12.0);
        let k = rng.gen_range(0.0..=1.0);
        let j = jacobi(u, k).unwrap();
        worst_pyth = worst_pyth
            .max((j.sn * j.sn + j.cn * j.cn - 1.0).abs())
            .max((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs());
    }
    assert!(worst_pyth < 1e-12, "identity residual {worst_pyth}");

    let mut worst_biquad = 0.0f64;
    for _ in 0..20 {
        let k = rng.gen_range(0.1..0.95);
        let big_k = quarter_period(k).unwrap();
        let sigma = rng.gen_range(0.15..1.85) * big_k;
        let rel = biquad_coefficients(sigma, k).unwrap();
        for i in 0..81 {
            let u = -4.0 * big_k + 8.0 * big_k * i as f64 / 80.0;
            let t = jacobi(u, k).unwrap().dn;
            let tp = jacobi(u - sigma, k).unwrap().dn;
            worst_biquad = worst_biquad.max(rel.eval(t, tp).abs());
        }
    }
    assert!(worst_biquad < 1e-11, "biquadratic residual {worst_biquad}");

    // Circular-limit oracle pins the cross-term sign:
    // 3/4 + 1/4 - 2 + 1/4 + 3/4 = 0.
    let rel = biquad_coefficients(std::f64::consts::PI / 3.0, 1e-9).unwrap();
    for (got, want) in rel
        .coefficients()
        .iter()
        .zip([0.75, 0.25, -1.0, 0.25, 0.75])
    {
        assert!((got - want).abs() < 1e-8, "{:?}", rel.coefficients());
    }
    assert!(rel.eval(1.0, 1.0).abs() < 1e-8);
    pass(
        3,
        "Jacobi identities and the sign-resolved biquadratic relation",
        &format!("identities {worst_pyth:.2e} < 1e-12, relation {worst_biquad:.2e} < 1e-11"),
    );
}

#[test]
fn criterion_04_elliptic_families_realize_and_flex() {
    let mut worst = 0.0f64;
    for n in [3usize, 4] {
        let fam = fixtures::elliptic(n);
        // The realization gate ran inside the constructor; re-check the
        // Gram shape explicitly.
        let eig = nalgebra::SymmetricEigen::new(fam.gram.clone());
        let mut evs: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(evs[0].abs() < 1e-9 * evs[n - 1], "rank gate: {evs:?}");
        assert!(evs[1] > 1e-9, "positive part: {evs:?}");
        let big_k = fam.modulus.quarter_period;
        let sweep = sweep_family(&fam, 0.0, 4.0 * big_k, 81).unwrap();
        worst = worst.max(sweep.max_edge_deviation());
        assert!(sweep.max_edge_deviation() < 1e-9, "n={n}");
    }
    pass(
        4,
        "shipped elliptic specs pass the Gram gate and flex isometrically",
        &format!("max edge deviation {worst:.2e} < 1e-9, n = 3 and 4"),
    );
}

#[test]
fn criterion_05_type_i_symmetry_line() {
    let fam = fixtures::elliptic(3);
    let big_k = fam.modulus.quarter_period;
    let mut worst = 0.0f64;
    for i in 0..81 {
        let u = 4.0 * big_k * i as f64 / 80.0;
        let p = fam.eval(u).unwrap();
        let dev = perpendicular_bisector_deviation(&p);
        worst = worst.max(dev);
        assert!(dev < 1e-8, "u={u}: deviation {dev}");
    }
    pass(
        5,
        "the n = 3 elliptic family has a common perpendicular bisector of its diagonals",
        &format!("max deviation {worst:.2e} < 1e-8 over 81 samples"),
    );
}

#[test]
fn criterion_06_euclidean_bellows() {
    let start = Instant::now();
    let mut cases: Vec<(String, FlexFamily, f64, f64, usize)> = Vec::new();
    for n in 3..=5 {
        cases.push((
            format!("rational n={n}"),
            FlexFamily::Rational(fixtures::rational(n)),
            -1.3,
            1.7,
            41,
        ));
    }
    for n in 3..=4 {
        let fam = fixtures::elliptic(n);
        let big_k = fam.modulus.quarter_period;
        cases.push((
            format!("elliptic n={n}"),
            FlexFamily::Elliptic(fam),
            0.0,
            4.0 * big_k,
            41,
        ));
    }
    let type2 = fixtures::bricard_type_ii();
    let (lo, hi) = type2.default_range();
    cases.push(("tracked type II".into(), type2, lo, hi, 41));

    let mut worst = 0.0f64;
    for (name, family, from, to, steps) in &cases {
        let report = bellows_report(family, *from, *to, *steps, VolumeMethod::ConeSum, None)
            .unwrap();
        let v0 = report.volumes[0];
        let rel = report.max_volume_deviation() / (1.0 + v0.abs());
        worst = worst.max(rel);
        assert_eq!(report.verdict, Verdict::Constant, "{name}: deviation {rel}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(
        6,
        "cone-sum volume is constant along every shipped Euclidean family",
        &format!(
            "max relative deviation {worst:.2e} < 1e-8 over {} families, {elapsed:.2?}",
            cases.len()
        ),
    );
}

#[test]
fn criterion_07_volume_oracle_agreement() {
    let bricard = fixtures::elliptic(3).eval(0.9).unwrap();
    let cases: Vec<(&str, Polyhedron, f64)> = vec![
        ("cube", shapes::triangulated_cube(), 1.0),
        ("octahedron", shapes::regular_cross_polytope(3), 4.0 / 3.0),
        (
            "bricard sample",
            bricard.clone(),
            generalized_volume_euclidean(&bricard),
        ),
    ];
    let mut worst_sigmas = 0.0f64;
    for (name, p, expected) in &cases {
        let cone = generalized_volume_euclidean(p);
        assert!((cone - expected).abs() < 1e-10, "{name}: cone {cone}");
        let est = monte_carlo_volume(p, None, 1_000_000, 20_000).unwrap();
        let sigmas = (est.value - cone).abs() / est.std_error;
        worst_sigmas = worst_sigmas.max(sigmas);
        assert!(
            sigmas < 3.0,
            "{name}: MC {} vs cone {cone} is {sigmas:.2} sigma",
            est.value
        );
    }
    pass(
        7,
        "cone-sum and Monte Carlo winding volumes agree at 10^6 samples",
        &format!("worst deviation {worst_sigmas:.2} sigma < 3"),
    );
}

#[test]
fn criterion_08_rigidity_dichotomy() {
    let rigid = shapes::regular_cross_polytope(3);
    let (system, seed) = system_from_configuration(&rigid, None).unwrap();
    let report = rigidity_test(&system, &seed).unwrap();
    assert_eq!(report.kernel_dim, 0, "regular octahedron is rigid");
    assert!(
        report.min_singular_value > 1e-6,
        "min singular value {}",
        report.min_singular_value
    );

    let mut kernel_dims = Vec::new();
    for p in [
        fixtures::elliptic(3).eval(0.9).unwrap(),
        fixtures::rational(3).eval(0.7).unwrap(),
    ] {
        let (system, seed) = system_from_configuration(&p, None).unwrap();
        let r = rigidity_test(&system, &seed).unwrap();
        kernel_dims.push(r.kernel_dim);
        assert_eq!(r.kernel_dim, 1, "flexible sample has a one-parameter flex");
    }
    pass(
        8,
        "rigidity dichotomy: convex rigid, Bricard samples one-parameter flexible",
        &format!(
            "regular kernel 0 with sigma_min {:.2e} > 1e-6; flexible kernels {kernel_dims:?}",
            report.min_singular_value
        ),
    );
}

#[test]
fn criterion_09_continuation_matches_closed_form() {
    let fam = fixtures::elliptic(3);
    let u0 = 0.8;
    let seed_poly = fam.eval(u0).unwrap();
    let (system, seed) = system_from_configuration(&seed_poly, None).unwrap();
    let opts = TrackOptions {
        step: 0.02,
        max_step: 0.02,
        max_steps: 110,
        ..TrackOptions::default()
    };
    let path = track_flex(&system, &seed, opts).unwrap();
    assert!(path.samples.len() >= 101, "{} samples", path.samples.len());

    // Arc-length alignment: for each tracked sample find the family
    // parameter with the closest configuration.
    let distance_at = |u: f64, poly: &Polyhedron| -> f64 {
        let q = fam.eval(u).unwrap();
        (0..6)
            .map(|v| (&poly.coords[v] - &q.coords[v]).norm())
            .fold(0.0, f64::max)
    };
    let mut u_prev = u0;
    let mut worst_dist = 0.0f64;
    let mut worst_res = 0.0f64;
    for s in &path.samples {
        let poly = system.polyhedron(&s.vars);
        let (res, _) = system.evaluate(&s.vars).unwrap();
        worst_res = worst_res.max(res.amax());
        // Ternary minimization around the previous parameter.
        let (mut lo, mut hi) = (u_prev - 0.15, u_prev + 0.15);
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if distance_at(m1, &poly) < distance_at(m2, &poly) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let u_best = 0.5 * (lo + hi);
        let d = distance_at(u_best, &poly);
        worst_dist = worst_dist.max(d);
        assert!(d < 1e-7, "sample at arclength {}: distance {d}", s.arclength);
        u_prev = u_best;
    }
    assert!(worst_res < 1e-10);
    pass(
        9,
        "tracking seeded from the elliptic family reproduces it",
        &format!(
            "{} steps, vertex distance {worst_dist:.2e} < 1e-7, residual {worst_res:.2e} < 1e-10",
            path.samples.len() - 1
        ),
    );
}

#[test]
fn criterion_10_symmetry_reduction_pipeline() {
    // Generic line-symmetric octahedron in canonical position.
    let k = Arc::new(cross_polytope_complex(3));
    let dv = |v: &[f64]| DVector::from_row_slice(v);
    let a1 = dv(&[1.27, 0.0, 0.0]);
    let a2 = dv(&[0.23, 1.04, 0.58]);
    let a3 = dv(&[-0.41, 0.52, 1.17]);
    let rho = |p: &DVector<f64>| dv(&[-p[0], -p[1], p[2]]);
    let coords = vec![a1.clone(), a2.clone(), a3.clone(), rho(&a1), rho(&a2), rho(&a3)];
    let p = Polyhedron::new(ModelSpace::Euclidean(3), Arc::clone(&k), coords);

    let (system, _) = system_from_configuration(&p, None).unwrap();
    let inv = Involution::new(&k, vec![3, 4, 5, 0, 1, 2], SymmetryKind::Line).unwrap();
    let reduced = symmetry_reduce(&system, &inv).unwrap();
    assert_eq!(reduced.variable_count(), 7, "3k-2 coordinates for k = 3");
    assert_eq!(reduced.equation_count(), 6, "one equation per edge orbit");

    let vars = reduced.reduce_configuration(&p).unwrap();
    let report = rigidity_test(&reduced, &vars).unwrap();
    assert_eq!(report.kernel_dim, 1, "generic symmetric seed flexes");

    let path = track_flex(&reduced, &vars, TrackOptions::default()).unwrap();
    assert!(path.samples.len() >= 100);
    let lengths = EdgeLengths::from_polyhedron(&p);
    let mut worst = 0.0f64;
    for s in &path.samples {
        let lifted = reduced.polyhedron(&s.vars);
        worst = worst.max(configuration_residual(&lifted, &lengths));
    }
    assert!(worst < 1e-12, "lifted residual {worst}");
    pass(
        10,
        "antipodal reduction: 7 variables / 6 equations, a symmetric flex, exact lifts",
        &format!(
            "kernel 1, {} steps, lifted constraint residual {worst:.2e} < 1e-12",
            path.samples.len() - 1
        ),
    );
}

#[test]
fn criterion_11_spherical_counterexample() {
    let fam = BipyramidFamily::new([0.6; 4]).unwrap();
    let (lo, hi) = fam.default_range();

    // Monte Carlo winding volume at the sweep extremes.
    let p_lo = fam.eval(lo).unwrap();
    let p_hi = fam.eval(hi).unwrap();
    let est_lo = monte_carlo_volume(&p_lo, None, 1_000_000, 77).unwrap();
    let est_hi = monte_carlo_volume(&p_hi, None, 1_000_000, 78).unwrap();
    let variation = (est_hi.value - est_lo.value).abs();
    let pooled = (est_lo.std_error.powi(2) + est_hi.std_error.powi(2)).sqrt();
    assert!(
        variation > 20.0 * pooled,
        "variation {variation} vs pooled std error {pooled}"
    );

    // Schläfli (with the positive spherical sign) against the join oracle
    // V = (pi/2) A.
    let steps = 161;
    let path: Vec<Polyhedron> = (0..steps)
        .map(|i| fam.eval(lo + (hi - lo) * i as f64 / (steps - 1) as f64).unwrap())
        .collect();
    let report = schlafli_variation(&path).unwrap();
    let expected = std::f64::consts::FRAC_PI_2
        * (fam.base_area(hi).unwrap() - fam.base_area(lo).unwrap());
    let mismatch = (report.delta - expected).abs();
    assert!(mismatch < 1e-4, "Schläfli {} vs join {expected}", report.delta);

    // The edges never move: the volume change is a genuine counterexample.
    let reference = p_lo.edge_lengths();
    assert!(p_hi.max_edge_deviation(&reference) < 1e-12);
    pass(
        11,
        "flexible spherical bipyramid has non-constant volume",
        &format!(
            "variation {variation:.4} > 20 x {pooled:.1e}; Schläfli vs (pi/2) dA mismatch {mismatch:.2e} < 1e-4"
        ),
    );
}

#[test]
fn criterion_12_hyperbolic_bellows() {
    // Line-symmetric octahedron on the hyperboloid, symmetric under
    // negating the middle ambient coordinates.
    let k = Arc::new(cross_polytope_complex(3));
    let lift = |x1: f64, x2: f64, x3: f64| {
        let x0 = (1.0f64 + x1 * x1 + x2 * x2 + x3 * x3).sqrt();
        DVector::from_row_slice(&[x0, x1, x2, x3])
    };
    let a1 = lift(0.9, 0.0, 0.0);
    let a2 = lift(0.1, 0.8, 0.45);
    let a3 = lift(-0.3, 0.4, 0.95);
    let rho = |p: &DVector<f64>| DVector::from_row_slice(&[p[0], -p[1], -p[2], p[3]]);
    let coords = vec![a1.clone(), a2.clone(), a3.clone(), rho(&a1), rho(&a2), rho(&a3)];
    let p = Polyhedron::new(ModelSpace::Hyperbolic(3), k, coords);

    let (system, seed) = system_from_configuration(&p, None).unwrap();
    let opts = TrackOptions {
        step: 0.02,
        max_step: 0.02,
        max_steps: 200,
        ..TrackOptions::default()
    };
    let path = track_flex(&system, &seed, opts).unwrap();
    assert!(path.samples.len() >= 201, "{} samples", path.samples.len());
    let polys: Vec<Polyhedron> = path
        .samples
        .iter()
        .map(|s| system.polyhedron(&s.vars))
        .collect();
    let report = schlafli_variation(&polys).unwrap();
    assert!(
        report.delta.abs() < 1e-6,
        "cumulative volume change {}",
        report.delta
    );
    let min_step_term = report
        .max_step_term
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert!(
        min_step_term > 1e-4,
        "per-step Schläfli terms reach only {min_step_term}"
    );
    pass(
        12,
        "tracked hyperbolic flexion keeps its volume (nontrivially)",
        &format!(
            "{} steps, |dV| = {:.2e} < 1e-6 while per-step terms stay > {min_step_term:.2e}",
            path.samples.len() - 1,
            report.delta.abs()
        ),
    );
}

#[test]
fn criterion_13_combinatorial_counts() {
    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut r = 1usize;
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    }
    for n in 2..=8 {
        let k = cross_polytope_complex(n);
        for j in 0..n {
            assert_eq!(k.face_count(j), (1 << (j + 1)) * binom(n, j + 1), "n={n} j={j}");
        }
    }
    let oct = shapes::regular_cross_polytope(3);
    let (system, _) = system_from_configuration(&oct, None).unwrap();
    assert_eq!(system.variable_count(), 9);
    assert_eq!(system.equation_count(), 9);

    let cp4 = shapes::regular_cross_polytope(4);
    let (system4, _) = system_from_configuration(&cp4, None).unwrap();
    assert_eq!(system4.variable_count(), 16);
    assert_eq!(system4.equation_count(), 18);
    pass(
        13,
        "f-vectors for n = 2..8 and configuration system counts",
        "octahedron 9/9, four-dimensional cross-polytope 16/18",
    );
}
