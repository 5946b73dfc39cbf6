//! Real Jacobi elliptic functions and the biquadratic relation they satisfy.
//!
//! Everything here works with the modulus `k` (not the parameter `m = k^2`).
//! The quarter period comes from the arithmetic–geometric mean; `sn`, `cn`,
//! `dn` come from the descending Landen / Gauss transformation run to machine
//! convergence, with the argument reduced modulo `4K` first so the backward
//! recurrence never sees a large angle.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("modulus k = {0} outside the admissible range {1}")]
    DomainError(f64, &'static str),
    #[error("shift sigma = {sigma} is congruent to 0 mod 2K = {two_k}; the biquadratic degenerates to t = t'")]
    DegenerateShiftError { sigma: f64, two_k: f64 },
}

/// Modulus together with its real quarter period `K(k)`.
#[derive(Debug, Clone, Copy)]
pub struct EllipticModulus {
    pub k: f64,
    pub quarter_period: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        Ok(Self {
            k,
            quarter_period: quarter_period(k)?,
        })
    }
}

/// Values of the three Jacobi functions at a common argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Complete elliptic integral of the first kind, `K(k) = pi / (2 AGM(1, k'))`.
pub fn quarter_period(k: f64) -> Result<f64, EllipticError> {
    if !(0.0..1.0).contains(&k) {
        return Err(EllipticError::DomainError(k, "[0, 1)"));
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(std::f64::consts::PI / (2.0 * a))
}

/// `(sn, cn, dn)` at argument `u` for modulus `k` in `[0, 1]`.
///
/// The boundary values are exact special cases: circular functions at
/// `k = 0`, hyperbolic at `k = 1`.
///
/// ```
/// let j = flexilab::elliptica::jacobi(0.8, 0.6).unwrap();
/// assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-14);
/// assert!(j.dn > 0.0);
/// ```
pub fn jacobi(u: f64, k: f64) -> Result<Jacobi, EllipticError> {
    if !(0.0..=1.0).contains(&k) {
        return Err(EllipticError::DomainError(k, "[0, 1]"));
    }
    if k == 0.0 {
        return Ok(Jacobi {
            sn: u.sin(),
            cn: u.cos(),
            dn: 1.0,
        });
    }
    if k == 1.0 {
        let c = 1.0 / u.cosh();
        return Ok(Jacobi {
            sn: u.tanh(),
            cn: c,
            dn: c,
        });
    }

    let m = k * k;
    let kp2 = 1.0 - m;
    let big_k = quarter_period(k)?;
    // sn and cn have period 4K, dn has 2K; reducing mod 4K keeps the
    // doubled angle of the recurrence O(pi) for any input.
    let u = u - 4.0 * big_k * (u / (4.0 * big_k)).round();

    let mut a = vec![1.0f64];
    let mut c = vec![k];
    let mut b = (1.0 - k * k).sqrt();
    while *c.last().unwrap() > f64::EPSILON {
        let a_prev = *a.last().unwrap();
        a.push(0.5 * (a_prev + b));
        c.push(0.5 * (a_prev - b));
        b = (a_prev * b).sqrt();
        if a.len() > 64 {
            break;
        }
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        let s = (c[i] / a[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // dn^2 = 1 - m sn^2 = k'^2 + m cn^2; the right-hand form has no
    // cancellation and dn > 0 for every real argument when k < 1.
    let dn = (kp2 + m * cn * cn).sqrt();
    Ok(Jacobi { sn, cn, dn })
}

/// One biquadratic relation `A t^2 t'^2 + B t^2 + 2 C t t' + D t'^2 + E = 0`.
#[derive(Debug, Clone, Copy)]
pub struct BiquadraticRelation {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl BiquadraticRelation {
    pub fn eval(&self, t: f64, tp: f64) -> f64 {
        self.a * t * t * tp * tp
            + self.b * t * t
            + 2.0 * self.c * t * tp
            + self.d * tp * tp
            + self.e
    }

    /// Coefficient vector `(A, B, C, D, E)`.
    pub fn coefficients(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }
}

/// Relation satisfied identically in `u` by the pair `t = dn u`,
/// `t' = dn(u - sigma)`.
///
/// Coefficients: `A = sn^2 sigma`, `B = D = cn^2 sigma`,
/// `E = (1 - k^2) sn^2 sigma`, and cross coefficient `C = -dn sigma`.
/// The sign of `C` is pinned by two independent checks: the circular limit
/// `k -> 0`, `t = t' = 1` forces `A + B + 2C + D + E = 2 + 2C = 0`, and at
/// `sigma = K` the relation collapses to `(t t' - k')^2 = 0`, matching the
/// identity `dn u * dn(u - K) = k'` only with the negative cross term.
pub fn biquad_coefficients(sigma: f64, k: f64) -> Result<BiquadraticRelation, EllipticError> {
    if !(0.0..1.0).contains(&k) {
        return Err(EllipticError::DomainError(k, "[0, 1)"));
    }
    let two_k = 2.0 * quarter_period(k)?;
    let frac = (sigma / two_k - (sigma / two_k).round()).abs();
    if frac * two_k < 1e-12 {
        return Err(EllipticError::DegenerateShiftError { sigma, two_k });
    }
    let j = jacobi(sigma, k)?;
    Ok(BiquadraticRelation {
        a: j.sn * j.sn,
        b: j.cn * j.cn,
        c: -j.dn,
        d: j.cn * j.cn,
        e: (1.0 - k * k) * j.sn * j.sn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Independent oracle for K(k): the hypergeometric series
    /// K = (pi/2) * sum_n [ (2n)! / (2^{2n} (n!)^2) ]^2 k^{2n}.
    fn quarter_period_series(k: f64) -> f64 {
        let m = k * k;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for n in 1..200 {
            let nf = n as f64;
            let ratio = (2.0 * nf - 1.0) / (2.0 * nf);
            term *= ratio * ratio * m;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        PI / 2.0 * sum
    }

    /// Second independent route: ascending Landen product
    /// K(k) = (pi/2) * prod (1 + k_{i+1}), k_{i+1} = (1 - k_i')/(1 + k_i').
    fn quarter_period_landen(k: f64) -> f64 {
        let mut k = k;
        let mut prod = 1.0f64;
        for _ in 0..64 {
            if k < 1e-17 {
                break;
            }
            let kp = (1.0 - k * k).sqrt();
            let k_next = (1.0 - kp) / (1.0 + kp);
            prod *= 1.0 + k_next;
            k = k_next;
        }
        PI / 2.0 * prod
    }

    #[test]
    fn quarter_period_at_zero() {
        assert!((quarter_period(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_period_half_matches_series() {
        let agm = quarter_period(0.5).unwrap();
        let series = quarter_period_series(0.5);
        assert!((agm - series).abs() / series < 1e-13, "agm={agm} series={series}");
        // Frozen from the series oracle.
        assert!((agm - 1.685_750_354_812_596).abs() < 1e-13);
    }

    #[test]
    fn quarter_period_reference_values() {
        // Frozen 20-digit reference values (independent high-precision
        // evaluation of the complete integral).
        let table = [
            (0.1, 1.5747455615173559534),
            (0.3, 1.6080486199305127998),
            (0.5, 1.6857503548125960429),
            (0.7, 1.8456939983747234642),
            (0.9, 2.2805491384227703325),
            (0.99, 3.3566005233611916666),
        ];
        for (k, expected) in table {
            let got = quarter_period(k).unwrap();
            assert!(
                (got - expected).abs() < 1e-13 * expected,
                "K({k}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn jacobi_reference_values() {
        // Frozen 20-digit reference values for (sn, cn, dn).
        let table = [
            (0.8, 0.6, 0.69838572137896431154, 0.71572158286164853571, 0.90797172770006121686),
            (-2.3, 0.35, -0.80202542808497977845, -0.59728989000744431621, 0.9597929534833933986),
            (5.75, 0.82, -0.9782667014704527909, -0.20735057461728915913, 0.59708403173922378478),
            (11.2, 0.95, 0.69164492385440250183, 0.72223770277273517943, 0.75383594874751104421),
            (0.37, 0.05, 0.36159628681122643313, 0.93233477107975184253, 0.99983654679823083226),
        ];
        for (u, k, sn, cn, dn) in table {
            let j = jacobi(u, k).unwrap();
            assert!((j.sn - sn).abs() < 1e-13, "sn({u}, {k}) = {} vs {sn}", j.sn);
            assert!((j.cn - cn).abs() < 1e-13, "cn({u}, {k}) = {} vs {cn}", j.cn);
            assert!((j.dn - dn).abs() < 1e-13, "dn({u}, {k}) = {} vs {dn}", j.dn);
        }
    }

    #[test]
    fn quarter_period_agm_and_landen_agree() {
        for i in 1..=9 {
            let k = i as f64 / 10.0;
            let agm = quarter_period(k).unwrap();
            let landen = quarter_period_landen(k);
            assert!((agm - landen).abs() / agm < 1e-13, "k={k}: {agm} vs {landen}");
        }
    }

    #[test]
    fn quarter_period_domain() {
        assert!(quarter_period(1.0).is_err());
        assert!(quarter_period(1.5).is_err());
        assert!(quarter_period(-0.1).is_err());
        // Logarithmic divergence: large but finite just below 1.
        let near = quarter_period(0.999999).unwrap();
        assert!(near.is_finite() && near > 7.0);
    }

    #[test]
    fn jacobi_circular_limit() {
        for &u in &[-2.0, -0.3, 0.0, 0.7, 3.5] {
            let j = jacobi(u, 0.0).unwrap();
            assert!((j.sn - u.sin()).abs() < 1e-15);
            assert!((j.cn - u.cos()).abs() < 1e-15);
            assert!((j.dn - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn jacobi_at_zero() {
        let j = jacobi(0.0, 0.73).unwrap();
        assert!(j.sn.abs() < 1e-15);
        assert!((j.cn - 1.0).abs() < 1e-15);
        assert!((j.dn - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_hyperbolic_limit() {
        let j = jacobi(0.9, 1.0).unwrap();
        assert!((j.sn - 0.9f64.tanh()).abs() < 1e-15);
        assert!((j.cn - 1.0 / 0.9f64.cosh()).abs() < 1e-15);
        assert!((j.dn - j.cn).abs() < 1e-15);
    }

    #[test]
    fn jacobi_quarter_period_values() {
        let k = 0.7;
        let big_k = quarter_period(k).unwrap();
        let j = jacobi(big_k, k).unwrap();
        assert!((j.sn - 1.0).abs() < 1e-13);
        assert!(j.cn.abs() < 1e-13);
        assert!((j.dn - (1.0 - k * k).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn jacobi_pythagorean_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let u = rng.gen_range(-12.0..12.0);
            let k = rng.gen_range(0.0..=1.0);
            let j = jacobi(u, k).unwrap();
            let p1 = j.sn * j.sn + j.cn * j.cn - 1.0;
            let p2 = j.dn * j.dn + k * k * j.sn * j.sn - 1.0;
            assert!(p1.abs() < 1e-12, "sn^2+cn^2 off by {p1} at u={u} k={k}");
            assert!(p2.abs() < 1e-12, "dn^2+k^2sn^2 off by {p2} at u={u} k={k}");
        }
    }

    #[test]
    fn jacobi_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = rng.gen_range(-6.0..6.0);
            let k = rng.gen_range(0.05..0.95);
            let big_k = quarter_period(k).unwrap();
            let j0 = jacobi(u, k).unwrap();
            let j1 = jacobi(u + 4.0 * big_k, k).unwrap();
            assert!((j0.sn - j1.sn).abs() < 1e-10);
            assert!((j0.cn - j1.cn).abs() < 1e-10);
            let j2 = jacobi(u + 2.0 * big_k, k).unwrap();
            assert!((j0.dn - j2.dn).abs() < 1e-10);
        }
    }

    #[test]
    fn biquad_degenerate_shift() {
        assert!(matches!(
            biquad_coefficients(0.0, 0.5),
            Err(EllipticError::DegenerateShiftError { .. })
        ));
        let two_k = 2.0 * quarter_period(0.5).unwrap();
        assert!(biquad_coefficients(2.0 * two_k, 0.5).is_err());
        assert!(biquad_coefficients(0.9, 0.5).is_ok());
    }

    #[test]
    fn biquad_circular_limit_closes() {
        // k -> 0, t = t' = 1: A + B + 2C + D + E = 2 cos^2 s - 2 + 2 sin^2 s = 0.
        let rel = biquad_coefficients(PI / 3.0, 1e-9).unwrap();
        assert!((rel.a - 0.75).abs() < 1e-8);
        assert!((rel.b - 0.25).abs() < 1e-8);
        assert!((rel.c + 1.0).abs() < 1e-8);
        assert!((rel.d - 0.25).abs() < 1e-8);
        assert!((rel.e - 0.75).abs() < 1e-8);
        assert!(rel.eval(1.0, 1.0).abs() < 1e-8);
    }

    #[test]
    fn biquad_identity_on_dn_pair() {
        let k = 0.6;
        let sigma = 0.9;
        let rel = biquad_coefficients(sigma, k).unwrap();
        let big_k = quarter_period(k).unwrap();
        let mut worst = 0.0f64;
        for i in 0..100 {
            let u = -4.0 * big_k + 8.0 * big_k * i as f64 / 99.0;
            let t = jacobi(u, k).unwrap().dn;
            let tp = jacobi(u - sigma, k).unwrap().dn;
            worst = worst.max(rel.eval(t, tp).abs());
        }
        assert!(worst < 1e-11, "max residual {worst}");
    }

    #[test]
    fn biquad_identity_random_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..20 {
            let k = rng.gen_range(0.1..0.95);
            let big_k = quarter_period(k).unwrap();
            let sigma = rng.gen_range(0.15..1.85) * big_k;
            let rel = biquad_coefficients(sigma, k).unwrap();
            for i in 0..81 {
                let u = -4.0 * big_k + 8.0 * big_k * i as f64 / 80.0;
                let t = jacobi(u, k).unwrap().dn;
                let tp = jacobi(u - sigma, k).unwrap().dn;
                let r = rel.eval(t, tp);
                assert!(r.abs() < 1e-11, "residual {r} at k={k} sigma={sigma} u={u}");
            }
        }
    }

    #[test]
    fn dn_shift_by_quarter_period() {
        // dn(u - K) = k'/dn(u); the sigma = K relation is (t t' - k')^2 = 0.
        let k = 0.8;
        let big_k = quarter_period(k).unwrap();
        let kp = (1.0 - k * k).sqrt();
        for &u in &[-1.3, 0.2, 0.9, 2.4] {
            let t = jacobi(u, k).unwrap().dn;
            let tp = jacobi(u - big_k, k).unwrap().dn;
            assert!((t * tp - kp).abs() < 1e-12);
        }
    }
}
