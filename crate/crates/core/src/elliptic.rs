//! Elliptic integrals of the first kind and the Jacobi elliptic sine.
//!
//! Everything here uses the **parameter convention**: the second argument is
//! `m = k^2`, the quantity that multiplies `sin^2` under the square root.
//! Callers that track orbits close to the heteroclinic limit need `m`
//! extremely close to 1; [`EllipticParameter`] therefore stores the
//! complement `mc = 1 - m` alongside `m`, so that `1 - m` never has to be
//! recovered by subtraction.
//!
//! Algorithms: the arithmetic-geometric mean for `K(m)` (quadratic
//! convergence), the Carlson symmetric form `R_F` for the incomplete
//! integral, and a descending Landen ladder for `sn`/`cn`/`dn`.

use crate::error::{CoreError, Result};
use crate::math;

/// Parameter `m` of an elliptic integral or function, with its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParameter {
    m: f64,
    mc: f64,
}

impl EllipticParameter {
    /// Builds a parameter from `m` alone. Valid range `0 <= m <= 1`.
    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(CoreError::domain(alloc::format!(
                "elliptic parameter m = {m} outside [0, 1]"
            )));
        }
        Ok(Self { m, mc: 1.0 - m })
    }

    /// Builds a parameter from independently computed `m` and `mc = 1 - m`.
    ///
    /// Use this when `mc` is known to much better relative accuracy than
    /// `1 - m` evaluated in floating point (orbits near the heteroclinic
    /// limit have `mc` far below machine epsilon relative to 1).
    pub fn from_m_and_complement(m: f64, mc: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) || !(0.0..=1.0).contains(&mc) {
            return Err(CoreError::domain(alloc::format!(
                "elliptic parameter (m, mc) = ({m}, {mc}) outside [0, 1]"
            )));
        }
        Ok(Self { m, mc })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// The complementary parameter `1 - m`.
    pub fn complement(&self) -> f64 {
        self.mc
    }

    // The complement is authoritative: m may round to exactly 1.0 while
    // mc > 0 still describes a parameter strictly below 1.
    fn require_m_below_one(&self) -> Result<()> {
        if self.mc <= 0.0 {
            return Err(CoreError::domain(
                "elliptic parameter m = 1 (heteroclinic limit) is outside the function domain",
            ));
        }
        Ok(())
    }
}

/// Complete elliptic integral of the first kind `K(m)`.
///
/// AGM iteration: `K = pi / (2 agm(1, sqrt(1 - m)))`. Relative accuracy is a
/// few ulps for every `m` representable below 1.
pub fn complete_k(p: EllipticParameter) -> Result<f64> {
    p.require_m_below_one()?;
    let mut a = 1.0_f64;
    let mut b = math::sqrt(p.mc);
    for _ in 0..64 {
        if math::abs(a - b) <= 2.0 * f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = math::sqrt(a * b);
        a = an;
    }
    Ok(core::f64::consts::PI / (2.0 * a))
}

/// Incomplete elliptic integral of the first kind `F(phi | m)`,
/// `0 <= phi <= pi/2`.
///
/// Evaluated through Carlson's symmetric integral:
/// `F(phi | m) = sin(phi) R_F(cos^2 phi, 1 - m sin^2 phi, 1)`.
pub fn incomplete_f(phi: f64, p: EllipticParameter) -> Result<f64> {
    p.require_m_below_one()?;
    if !(0.0..=core::f64::consts::FRAC_PI_2 + 1e-12).contains(&phi) {
        return Err(CoreError::domain(alloc::format!(
            "amplitude phi = {phi} outside [0, pi/2]"
        )));
    }
    if phi == 0.0 {
        return Ok(0.0);
    }
    let (s, c) = math::sin_cos(phi);
    // 1 - m sin^2 = mc + m cos^2: both terms nonnegative, no cancellation.
    let q = p.mc + p.m * c * c;
    Ok(s * carlson_rf(c * c, q, 1.0)?)
}

/// Carlson `R_F(x, y, z)` by the duplication theorem.
///
/// Arguments must be nonnegative with at most one zero.
fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    const ERRTOL: f64 = 0.0025;
    const C1: f64 = 1.0 / 24.0;
    const C2: f64 = 0.1;
    const C3: f64 = 3.0 / 44.0;
    const C4: f64 = 1.0 / 14.0;
    let tiny = 5.0 * f64::MIN_POSITIVE;
    if x.min(y).min(z) < 0.0 || (x + y).min(x + z).min(y + z) < tiny {
        return Err(CoreError::domain(
            "carlson_rf arguments must be nonnegative with at most one zero",
        ));
    }
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut ave;
    let (mut dx, mut dy, mut dz);
    let mut it = 0usize;
    loop {
        let sx = math::sqrt(xt);
        let sy = math::sqrt(yt);
        let sz = math::sqrt(zt);
        let lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if math::abs(dx).max(math::abs(dy)).max(math::abs(dz)) < ERRTOL {
            break;
        }
        it += 1;
        if it > 64 {
            return Err(CoreError::convergence("carlson_rf failed to converge"));
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    Ok((1.0 + (C1 * e2 - C2 - C3 * e3) * e2 + C4 * e3) / math::sqrt(ave))
}

/// Jacobi elliptic sine `sn(x, m)`.
pub fn jacobi_sn(x: f64, p: EllipticParameter) -> Result<f64> {
    Ok(jacobi_sn_cn_dn(x, p)?.0)
}

/// Jacobi `sn`, `cn`, `dn` at `x`, parameter `m`.
pub fn jacobi_sn_cn_dn(x: f64, p: EllipticParameter) -> Result<(f64, f64, f64)> {
    Ok(JacobiLadder::new(p)?.eval(x))
}

const MAX_LEVELS: usize = 48;

/// Precomputed descending Landen ladder for repeated `sn`/`cn`/`dn`
/// evaluation at a fixed parameter.
///
/// The ladder reduces `m` below 1e-12 (half a dozen levels anywhere in
/// `[0, 1)`, including parameters whose complement `mc` sits far below
/// machine epsilon), evaluates the trigonometric limit there, and
/// transforms back up. `cn` is carried through the ladder as a product, so
/// it keeps full absolute accuracy near its zeros; `dn` is recovered from
/// `dn^2 = mc + m cn^2`, which has no cancellation.
#[derive(Debug, Clone)]
pub struct JacobiLadder {
    m: f64,
    mc: f64,
    /// Complete integral K(m); also the quarter period.
    kk: f64,
    /// Per level: (k1, m, mc) of the level below.
    levels: [(f64, f64, f64); MAX_LEVELS],
    n_levels: usize,
    /// m at the ladder exit (below the trig-base threshold).
    m_base: f64,
    /// Product of (1 + k1) over all levels: argument contraction factor.
    arg_scale: f64,
}

impl JacobiLadder {
    pub fn new(p: EllipticParameter) -> Result<Self> {
        const M_BASE: f64 = 1e-12;
        p.require_m_below_one()?;
        let kk = complete_k(p)?;
        let mut levels = [(0.0, 0.0, 0.0); MAX_LEVELS];
        let mut n_levels = 0usize;
        let mut m = p.m;
        let mut mc = p.mc;
        let mut arg_scale = 1.0;
        while m > M_BASE {
            if n_levels == MAX_LEVELS {
                return Err(CoreError::convergence("landen ladder failed to reduce m"));
            }
            // k1 = (1 - k')/(1 + k') written cancellation-free.
            let kp = math::sqrt(mc);
            let k1 = m / ((1.0 + kp) * (1.0 + kp));
            let one_minus_k1 = 2.0 * kp / (1.0 + kp);
            let m_next = k1 * k1;
            let mc_next = one_minus_k1 * (1.0 + k1);
            levels[n_levels] = (k1, m_next, mc_next);
            n_levels += 1;
            arg_scale *= 1.0 + k1;
            m = m_next;
            mc = mc_next;
        }
        Ok(Self {
            m: p.m,
            mc: p.mc,
            kk,
            levels,
            n_levels,
            m_base: m,
            arg_scale,
        })
    }

    pub fn quarter_period(&self) -> f64 {
        self.kk
    }

    /// `(sn, cn, dn)` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        // Reduce to y in [0, K] via sn(x + 2K) = -sn(x), cn(x + 2K) = -cn(x),
        // dn(x + 2K) = dn(x), then the reflection about K.
        let two_k = 2.0 * self.kk;
        let n = math::floor(x / two_k);
        let mut y = x - two_k * n;
        if y < 0.0 {
            y = 0.0;
        }
        let half = math::floor(n / 2.0);
        let flip = if math::abs(n - 2.0 * half) > 0.5 { -1.0 } else { 1.0 };
        let (reflect, y) = if y > self.kk {
            (true, two_k - y)
        } else {
            (false, y)
        };

        // Trigonometric base: error O(m^2) <= 1e-24 at the ladder exit.
        let arg = y / self.arg_scale;
        let (sv, cv) = math::sin_cos(arg);
        let corr = 0.25 * self.m_base * (arg - sv * cv);
        let mut s = sv - corr * cv;
        let mut c = cv + corr * sv;

        for i in (0..self.n_levels).rev() {
            let (k1, m_low, mc_low) = self.levels[i];
            let d_low = math::sqrt(mc_low + m_low * c * c);
            let denom = 1.0 + k1 * s * s;
            s = (1.0 + k1) * s / denom;
            c = c * d_low / denom;
        }
        let d = math::sqrt(self.mc + self.m * c * c);
        let (s, c) = if reflect { (s, -c) } else { (s, c) };
        (flip * s, flip * c, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn param(m: f64) -> EllipticParameter {
        EllipticParameter::new(m).unwrap()
    }

    /// Adaptive Simpson quadrature of the defining integral
    /// `int_0^phi dtheta / sqrt(1 - m sin^2 theta)`, the independent oracle
    /// for both K and F.
    fn quadrature_f(phi: f64, m: f64) -> f64 {
        fn integrand(theta: f64, m: f64) -> f64 {
            1.0 / (1.0 - m * theta.sin().powi(2)).sqrt()
        }
        fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64, m: f64, eps: f64, depth: u32) -> f64 {
            let mid = 0.5 * (a + b);
            let lm = 0.5 * (a + mid);
            let rm = 0.5 * (mid + b);
            let flm = integrand(lm, m);
            let frm = integrand(rm, m);
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            let left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() < 15.0 * eps {
                left + right + (left + right - whole) / 15.0
            } else {
                simpson(a, mid, fa, flm, fm, m, eps / 2.0, depth - 1)
                    + simpson(mid, b, fm, frm, fb, m, eps / 2.0, depth - 1)
            }
        }
        let fa = integrand(0.0, m);
        let fm = integrand(0.5 * phi, m);
        let fb = integrand(phi, m);
        simpson(0.0, phi, fa, fm, fb, m, 1e-13, 40)
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert!((complete_k(param(0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn k_matches_quadrature_oracle() {
        // Frozen from the adaptive-Simpson oracle above.
        let oracle = quadrature_f(FRAC_PI_2, 0.5);
        let k = complete_k(param(0.5)).unwrap();
        assert!((k - oracle).abs() < 1e-10, "K(0.5) = {k}, oracle = {oracle}");
        assert!((k - 1.854_074_677_301_372).abs() < 1e-12);
    }

    #[test]
    fn k_monotone_and_divergent_toward_one() {
        let mut prev = complete_k(param(0.0)).unwrap();
        for i in 1..=20 {
            let m = i as f64 / 20.5;
            let k = complete_k(param(m)).unwrap();
            assert!(k > prev, "K must increase in m");
            prev = k;
        }
        // Logarithmic blow-up as m -> 1: K(1 - mc) ~ ln(4/sqrt(mc)).
        let p = EllipticParameter::from_m_and_complement(1.0 - 1e-12, 1e-12).unwrap();
        let k = complete_k(p).unwrap();
        assert!((k - (4.0 / 1e-6_f64).ln()).abs() < 1e-6);
        let p = EllipticParameter::from_m_and_complement(1.0, 1e-30).unwrap();
        let k = complete_k(p).unwrap();
        assert!((k - (4.0 / 1e-15_f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn k_domain_errors() {
        assert!(EllipticParameter::new(-0.1).is_err());
        assert!(EllipticParameter::new(1.5).is_err());
        // m = 1 is a valid parameter value but outside the K/F/sn domain.
        assert!(complete_k(param(1.0)).is_err());
    }

    #[test]
    fn f_trivial_values() {
        assert_eq!(incomplete_f(0.0, param(0.7)).unwrap(), 0.0);
        let f = incomplete_f(FRAC_PI_2, param(0.3)).unwrap();
        let k = complete_k(param(0.3)).unwrap();
        assert!((f - k).abs() < 1e-12 * k);
    }

    #[test]
    fn f_matches_quadrature_oracle() {
        let oracle = quadrature_f(PI / 4.0, 0.3);
        let f = incomplete_f(PI / 4.0, param(0.3)).unwrap();
        assert!((f - oracle).abs() < 1e-10, "F = {f}, oracle = {oracle}");
        assert!((f - 0.808_459_030_448_461_9).abs() < 1e-12);
    }

    #[test]
    fn f_rejects_out_of_range() {
        assert!(incomplete_f(-0.1, param(0.3)).is_err());
        assert!(incomplete_f(2.0, param(0.3)).is_err());
    }

    #[test]
    fn sn_degenerate_parameter_is_sine() {
        for i in 0..50 {
            let x = -3.0 + 0.3 * i as f64;
            let s = jacobi_sn(x, param(0.0)).unwrap();
            assert!((s - x.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn sn_special_points() {
        let p = param(0.62);
        let k = complete_k(p).unwrap();
        assert_eq!(jacobi_sn(0.0, p).unwrap(), 0.0);
        assert!((jacobi_sn(k, p).unwrap() - 1.0).abs() < 1e-12);
        let (_, c, d) = jacobi_sn_cn_dn(k, p).unwrap();
        assert!(c.abs() < 1e-12);
        assert!((d - p.complement().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sn_near_heteroclinic_parameter_is_tanh() {
        // mc far below machine epsilon: sn ~ tanh to O(mc e^{2x}).
        let p = EllipticParameter::from_m_and_complement(1.0, 1e-30).unwrap();
        for x in [0.3, 1.0, 2.5, 7.0] {
            let s = jacobi_sn(x, p).unwrap();
            assert!((s - x.tanh()).abs() < 1e-12, "sn({x}) = {s}");
        }
    }

    #[test]
    fn sn_period_four_k() {
        for m in [0.05, 0.4, 0.83, 0.999] {
            let p = param(m);
            let k = complete_k(p).unwrap();
            for i in 0..12 {
                let x = -1.8 + 0.45 * i as f64;
                let a = jacobi_sn(x, p).unwrap();
                let b = jacobi_sn(x + 4.0 * k, p).unwrap();
                assert!((a - b).abs() < 1e-9, "m={m} x={x}: {a} vs {b}");
            }
        }
    }

    proptest! {
        /// Round trip sn(F(phi | m), m) = sin(phi).
        #[test]
        fn sn_inverts_incomplete_f(phi in 1e-6..(FRAC_PI_2 - 1e-6), m in 0.0..0.99f64) {
            let p = param(m);
            let f = incomplete_f(phi, p).unwrap();
            let s = jacobi_sn(f, p).unwrap();
            prop_assert!((s - phi.sin()).abs() < 1e-9);
        }

        /// F is strictly increasing in phi.
        #[test]
        fn f_monotone_in_phi(phi in 0.05..(FRAC_PI_2 - 0.05), m in 0.0..0.99f64) {
            let p = param(m);
            let lo = incomplete_f(phi - 0.04, p).unwrap();
            let hi = incomplete_f(phi + 0.04, p).unwrap();
            prop_assert!(hi > lo);
        }
    }

    #[test]
    fn sn_cn_dn_identities() {
        for m in [0.1, 0.5, 0.9, 0.9999] {
            let p = param(m);
            let k = complete_k(p).unwrap();
            for i in 0..40 {
                let x = -2.0 * k + 4.0 * k * (i as f64) / 39.0;
                let (s, c, d) = jacobi_sn_cn_dn(x, p).unwrap();
                assert!((s * s + c * c - 1.0).abs() < 1e-10);
                assert!((d * d + m * s * s - 1.0).abs() < 1e-10);
            }
        }
    }
}
