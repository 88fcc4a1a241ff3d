//! Exact spatially uniform periodic solutions on the invariant plane
//! `u + v + w = 1`, parameterized by the conserved product `A = u v w`.
//!
//! On the plane, `u` obeys `u'^2 = P(u)` with
//! `P(u) = (u - u^2)^2 - 4 A u = u (u^3 - 2u^2 + u - 4A)`, so the turning
//! points `u_1 < u_2` and the outer root `u_3` are the positive roots of the
//! cubic `u^3 - 2u^2 + u - 4A`. The solution is
//!
//! ```text
//! u(t) = u1 u2 / (u2 cn^2(theta, m) + u1 sn^2(theta, m)),
//! theta = t sqrt(u2 (u3 - u1)) / 2,
//! m     = u3 (u2 - u1) / (u2 (u3 - u1)),
//! ```
//!
//! with `v(t) = u(t - T/3)` and `w(t) = u(t + T/3)`. The period is
//!
//! ```text
//! T = 4 K(m) / sqrt(u2 (u3 - u1)).
//! ```
//!
//! The prefactor `4 / sqrt(u2 (u3 - u1))` is the only choice consistent with
//! the inverse function above and with the coexistence limit
//! `T -> 2 pi sqrt(3)` as `A -> 1/27` (the variant without the square root
//! fails both checks and is rejected by the first-return test).
//!
//! Phase convention: `t = 0` sits at the minimum of `u`, i.e. `u(0) = u1`.

use crate::elliptic::{complete_k, incomplete_f, EllipticParameter, JacobiLadder};
use crate::error::{CoreError, Result};
use crate::linalg::Vec3;
use crate::math;
use alloc::format;

/// Coexistence value of the conserved product: `A -> 1/27` collapses the
/// orbit onto the fixed point `(1/3, 1/3, 1/3)`.
pub const A_COEXISTENCE: f64 = 1.0 / 27.0;

/// Minimum period `2 pi sqrt(3)`, attained in the coexistence limit.
pub const T_MIN: f64 = 10.882_796_185_405_306;

/// Orbits with `A` within this distance of `1/27` are refused: the turning
/// points merge there and downstream Floquet quantities are ill-conditioned.
pub const DEGENERACY_MARGIN: f64 = 1e-12;

/// Which side of the oscillation `time_of_u` should resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `u` rising from `u1` toward `u2`, i.e. `t` in `[0, T/2]`.
    Ascending,
    /// `u` falling back toward `u1`, i.e. `t` in `[T/2, T]`.
    Descending,
}

/// The three positive roots of `u^3 - 2u^2 + u - 4A`, ascending, together
/// with the cancellation-free complements of the two roots near 1.
#[derive(Debug, Clone, Copy)]
struct CubicRoots {
    u1: f64,
    u2: f64,
    u3: f64,
    /// `1 - u2`, solved directly (never formed by subtraction).
    d2: f64,
    /// `u3 - 1`, solved directly.
    d3: f64,
}

fn check_amplitude(a: f64) -> Result<()> {
    if !a.is_finite() || a <= 0.0 {
        return Err(CoreError::domain(format!(
            "amplitude A = {a} is at or beyond the heteroclinic limit (need A > 0)"
        )));
    }
    if a >= A_COEXISTENCE {
        return Err(CoreError::domain(format!(
            "amplitude A = {a} is at or beyond the coexistence value 1/27"
        )));
    }
    Ok(())
}

/// Safeguarded Newton on a bracketing interval; `f` must be strictly
/// increasing on `[lo, hi]` with `f(lo) < 0 < f(hi)`. Falls back to
/// bisection whenever the Newton step leaves the current bracket.
fn bracketed_newton(
    mut lo: f64,
    mut hi: f64,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..120 {
        let fx = f(x);
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dfx = df(x);
        let mut x_new = if dfx != 0.0 { x - fx / dfx } else { x };
        if !(x_new > lo && x_new < hi) {
            x_new = 0.5 * (lo + hi);
        }
        if math::abs(x_new - x) <= 1e-17 * (1.0 + math::abs(x_new)) {
            return x_new;
        }
        x = x_new;
    }
    x
}

fn cubic_roots(a: f64) -> Result<CubicRoots> {
    check_amplitude(a)?;
    let rhs = 4.0 * a;
    // For small A the roots sit at 4A and 1 -+ 2 sqrt(A) to leading order;
    // seed tight brackets there so Newton never has to walk down hundreds
    // of binades from the fixed brackets.
    let small = a < 1e-5;
    let sq = math::sqrt(rhs);
    // u1 in (0, 1/3): root of u (1-u)^2 = 4A.
    let (lo1, hi1) = if small { (0.9 * rhs, 2.0 * rhs) } else { (0.0, 1.0 / 3.0) };
    let u1 = bracketed_newton(
        lo1,
        hi1,
        |u| u * (1.0 - u) * (1.0 - u) - rhs,
        |u| (1.0 - u) * (1.0 - 3.0 * u),
    );
    // d2 = 1 - u2 in (0, 2/3): root of d^2 (1 - d) = 4A.
    let (lo2, hi2) = if small { (0.9 * sq, 1.5 * sq) } else { (0.0, 2.0 / 3.0) };
    let d2 = bracketed_newton(
        lo2,
        hi2,
        |d| d * d * (1.0 - d) - rhs,
        |d| d * (2.0 - 3.0 * d),
    );
    // d3 = u3 - 1 in (0, 1): root of d^2 (1 + d) = 4A.
    let (lo3, hi3) = if small { (0.6 * sq, 1.1 * sq) } else { (0.0, 1.0) };
    let d3 = bracketed_newton(
        lo3,
        hi3,
        |d| d * d * (1.0 + d) - rhs,
        |d| d * (2.0 + 3.0 * d),
    );
    Ok(CubicRoots {
        u1,
        u2: 1.0 - d2,
        u3: 1.0 + d3,
        d2,
        d3,
    })
}

/// The three positive roots of `u (1 - u)^2 = 4A` in ascending order.
///
/// `u1, u2 < 1 < u3`; `u(t)` oscillates between `u1` and `u2`. Bracketed
/// bisection with a Newton polish on the fixed brackets `(0, 1/3)`,
/// `(1/3, 1)`, `(1, 2)`; the two roots adjacent to 1 are solved in the
/// shifted variable so that their distance from 1 carries full relative
/// accuracy arbitrarily close to the heteroclinic limit.
pub fn quartic_roots(a: f64) -> Result<(f64, f64, f64)> {
    let r = cubic_roots(a)?;
    Ok((r.u1, r.u2, r.u3))
}

impl CubicRoots {
    /// Elliptic parameter with its complement formed cancellation-free:
    /// `1 - m = u1 (u3 - u2) / (u2 (u3 - u1))`.
    fn elliptic_parameter(&self) -> Result<EllipticParameter> {
        let denom = self.u2 * (self.u3 - self.u1);
        let m = self.u3 * (self.u2 - self.u1) / denom;
        let mc = self.u1 * (self.d2 + self.d3) / denom;
        EllipticParameter::from_m_and_complement(m.min(1.0), mc)
    }

    fn frequency_scale(&self) -> f64 {
        math::sqrt(self.u2 * (self.u3 - self.u1))
    }
}

/// Period of the orbit with conserved product `A`.
pub fn period(a: f64) -> Result<f64> {
    let roots = cubic_roots(a)?;
    let p = roots.elliptic_parameter()?;
    Ok(4.0 * complete_k(p)? / roots.frequency_scale())
}

/// Inverts the (strictly decreasing) period map: the unique `A` with
/// `period(A) = t_period`, to relative accuracy 1e-10.
///
/// Bisection runs in `ln A`, so near-heteroclinic amplitudes (which decay
/// exponentially with the period) keep full relative accuracy.
pub fn amplitude_from_period(t_period: f64) -> Result<f64> {
    if !(t_period.is_finite() && t_period > T_MIN) {
        return Err(CoreError::domain(format!(
            "no orbit with period {t_period}: periods range over (2 pi sqrt(3), inf)"
        )));
    }
    let mut s_hi = math::ln(A_COEXISTENCE) - 1e-9;
    if period(math::exp(s_hi))? >= t_period {
        return Err(CoreError::domain(format!(
            "period {t_period} is below the resolvable margin above 2 pi sqrt(3)"
        )));
    }
    let mut s_lo = -8.0;
    while period(math::exp(s_lo))? < t_period {
        s_lo -= 16.0;
        if s_lo < -700.0 {
            return Err(CoreError::convergence(format!(
                "failed to bracket period {t_period} from below"
            )));
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (s_lo + s_hi);
        if period(math::exp(mid))? < t_period {
            s_hi = mid;
        } else {
            s_lo = mid;
        }
        if s_hi - s_lo < 1e-11 {
            break;
        }
    }
    Ok(math::exp(0.5 * (s_lo + s_hi)))
}

/// One exact uniform oscillation, immutable after construction.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    a: f64,
    t_period: f64,
    roots: CubicRoots,
    m: EllipticParameter,
    ladder: JacobiLadder,
    /// `sqrt(u2 (u3 - u1))`: `theta = freq_scale * t / 2`.
    freq_scale: f64,
}

impl PeriodicOrbit {
    /// Builds the orbit with conserved product `A`, `0 < A < 1/27`.
    ///
    /// Amplitudes within [`DEGENERACY_MARGIN`] of `1/27` are refused rather
    /// than silently returning a near-constant orbit.
    pub fn new(a: f64) -> Result<Self> {
        check_amplitude(a)?;
        if A_COEXISTENCE - a < DEGENERACY_MARGIN {
            return Err(CoreError::domain(format!(
                "amplitude A = {a} is within {DEGENERACY_MARGIN:.0e} of the coexistence value; \
                 the orbit is numerically degenerate there"
            )));
        }
        let roots = cubic_roots(a)?;
        let m = roots.elliptic_parameter()?;
        let ladder = JacobiLadder::new(m)?;
        let freq_scale = roots.frequency_scale();
        let t_period = 4.0 * ladder.quarter_period() / freq_scale;
        Ok(Self {
            a,
            t_period,
            roots,
            m,
            ladder,
            freq_scale,
        })
    }

    /// Builds the orbit whose period is `t_period`.
    pub fn from_period(t_period: f64) -> Result<Self> {
        Self::new(amplitude_from_period(t_period)?)
    }

    pub fn amplitude(&self) -> f64 {
        self.a
    }

    pub fn period(&self) -> f64 {
        self.t_period
    }

    /// `(u1, u2, u3)`: turning points and outer cubic root.
    pub fn roots(&self) -> (f64, f64, f64) {
        (self.roots.u1, self.roots.u2, self.roots.u3)
    }

    pub fn elliptic_parameter(&self) -> EllipticParameter {
        self.m
    }

    /// The `u`-component at time `t` (minimum `u1` at `t = 0`).
    pub fn u_component(&self, t: f64) -> f64 {
        let theta = 0.5 * self.freq_scale * t;
        let (s, c, _) = self.ladder.eval(theta);
        let (u1, u2) = (self.roots.u1, self.roots.u2);
        // No cancellation: both denominator terms are nonnegative.
        u1 * u2 / (u2 * c * c + u1 * s * s)
    }

    /// `(u, v, w)` at time `t`: `v` lags `u` by `T/3`, `w` leads by `T/3`.
    pub fn point(&self, t: f64) -> Vec3 {
        let third = self.t_period / 3.0;
        [
            self.u_component(t),
            self.u_component(t - third),
            self.u_component(t + third),
        ]
    }

    /// Time derivative `(u', v', w')` at `t`, evaluated through the
    /// governing equations (exact on the solution).
    pub fn derivative(&self, t: f64) -> Vec3 {
        let [u, v, w] = self.point(t);
        [
            u * (1.0 - u - 2.0 * v),
            v * (1.0 - v - 2.0 * w),
            w * (1.0 - w - 2.0 * u),
        ]
    }

    /// `|u'|` from the quadrature form `sqrt(P(u))`; used as an independent
    /// check of the solution, not in the evaluation path.
    pub fn u_speed_from_polynomial(&self, u: f64) -> f64 {
        let p = (u - u * u) * (u - u * u) - 4.0 * self.a * u;
        math::sqrt(math::abs(p).max(0.0))
    }

    /// First time on the given branch at which `u(t) = u`.
    ///
    /// Ascending: `t` in `[0, T/2]` from the incomplete integral; descending
    /// mirrors it to `[T/2, T]`.
    pub fn time_of_u(&self, u: f64, branch: Branch) -> Result<f64> {
        let (u1, u2) = (self.roots.u1, self.roots.u2);
        let slack = 1e-12 * (u2 - u1);
        if !(u1 - slack..=u2 + slack).contains(&u) {
            return Err(CoreError::domain(format!(
                "u = {u} outside the oscillation range [{u1}, {u2}]"
            )));
        }
        let u = u.clamp(u1, u2);
        // sin^2(phi) = u2 (u - u1) / (u (u2 - u1)).
        let s2 = (u2 * (u - u1)) / (u * (u2 - u1));
        let phi = math::asin(math::sqrt(s2.clamp(0.0, 1.0)));
        let t_asc = 2.0 * incomplete_f(phi, self.m)? / self.freq_scale;
        Ok(match branch {
            Branch::Ascending => t_asc,
            Branch::Descending => self.t_period - t_asc,
        })
    }
}
