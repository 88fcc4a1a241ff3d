//! Adaptive embedded Runge-Kutta integration: Dormand-Prince 5(4) with the
//! classical quartic dense-output interpolant, generic over a const state
//! dimension.
//!
//! Everything downstream (monodromy matrices, orbit relaxation, Poincare
//! return maps) runs through this integrator, so the dense output is tested
//! against closed-form solutions rather than trusted.

use crate::error::{CoreError, Result};
use crate::math;
use alloc::format;
use alloc::vec::Vec;

/// Right-hand side of an autonomous-in-form ODE `y' = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]);
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    fn rhs(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]) {
        self(t, y, dydt)
    }
}

/// Integration tolerances; the error controller uses
/// `atol + rtol * max(|y0|, |y1|)` componentwise.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        // Multipliers near the unit circle need tight transition matrices.
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn from_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            atol: rtol * 1e-2,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Embedded 4th-order weights.
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its dense-output polynomial.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    r1: [f64; N],
    r2: [f64; N],
    r3: [f64; N],
    r4: [f64; N],
    r5: [f64; N],
}

impl<const N: usize> DenseStep<N> {
    /// Evaluates the interpolant at `t` inside `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.r1[i]
                + theta
                    * (self.r2[i] + th1 * (self.r3[i] + theta * (self.r4[i] + th1 * self.r5[i])));
        }
        out
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }
}

/// Integrator state advancing one accepted step at a time.
pub struct DormandPrince<'a, S, const N: usize> {
    system: &'a S,
    pub t: f64,
    pub y: [f64; N],
    f_cur: [f64; N],
    h: f64,
    tol: Tolerances,
    direction: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    max_steps: usize,
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

impl<'a, S: OdeSystem<N>, const N: usize> DormandPrince<'a, S, N> {
    pub fn new(system: &'a S, t0: f64, y0: [f64; N], direction: f64, tol: Tolerances) -> Self {
        let mut f0 = [0.0; N];
        system.rhs(t0, &y0, &mut f0);
        let h = initial_step(system, t0, &y0, &f0, direction, &tol);
        Self {
            system,
            t: t0,
            y: y0,
            f_cur: f0,
            h,
            tol,
            direction,
            steps_accepted: 0,
            steps_rejected: 0,
            max_steps: 50_000_000,
        }
    }

    /// Advances past one accepted step, never stepping beyond `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseStep<N>> {
        if self.steps_accepted + self.steps_rejected > self.max_steps {
            return Err(CoreError::convergence(format!(
                "integrator exceeded the step budget at t = {}",
                self.t
            )));
        }
        let mut k = [[0.0_f64; N]; 7];
        k[0] = self.f_cur;
        loop {
            let mut h = self.h * self.direction;
            let remaining = t_limit - self.t;
            if remaining.abs() <= h.abs() {
                h = remaining;
            }
            if h == 0.0 {
                return Err(CoreError::convergence(format!(
                    "integrator stalled at t = {} (step underflow)",
                    self.t
                )));
            }
            let t = self.t;
            let y = &self.y;
            let stage = |c: f64, coeffs: &[(f64, usize)], k: &mut [[f64; N]; 7], slot: usize| {
                let mut yt = *y;
                for &(a, j) in coeffs {
                    for i in 0..N {
                        yt[i] += h * a * k[j][i];
                    }
                }
                let mut f = [0.0; N];
                self.system.rhs(t + c * h, &yt, &mut f);
                k[slot] = f;
            };
            stage(C[1], &[(A21, 0)], &mut k, 1);
            stage(C[2], &[(A31, 0), (A32, 1)], &mut k, 2);
            stage(C[3], &[(A41, 0), (A42, 1), (A43, 2)], &mut k, 3);
            stage(C[4], &[(A51, 0), (A52, 1), (A53, 2), (A54, 3)], &mut k, 4);
            stage(
                C[5],
                &[(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)],
                &mut k,
                5,
            );

            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = self.y[i]
                    + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i]
                        + B6 * k[5][i]);
            }
            let mut f_new = [0.0; N];
            self.system.rhs(t + h, &y_new, &mut f_new);
            k[6] = f_new;

            // Embedded error estimate.
            let mut err_sq = 0.0;
            for i in 0..N {
                let y4 = self.y[i]
                    + h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i]
                        + E6 * k[5][i]
                        + E7 * k[6][i]);
                let sc = self.tol.atol + self.tol.rtol * math::abs(self.y[i]).max(math::abs(y_new[i]));
                let e = (y_new[i] - y4) / sc;
                err_sq += e * e;
            }
            let err = math::sqrt(err_sq / N as f64);

            if !err.is_finite() {
                self.steps_rejected += 1;
                self.h *= 0.25;
                if self.h.abs() < 1e-14 * (1.0 + self.t.abs()) {
                    return Err(CoreError::convergence(format!(
                        "integrator produced non-finite values near t = {}",
                        self.t
                    )));
                }
                continue;
            }

            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * math::powf(err, -0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };

            if err <= 1.0 {
                // Accept: build the dense-output polynomial.
                let mut r1 = [0.0; N];
                let mut r2 = [0.0; N];
                let mut r3 = [0.0; N];
                let mut r4 = [0.0; N];
                let mut r5 = [0.0; N];
                for i in 0..N {
                    let ydiff = y_new[i] - self.y[i];
                    let bspl = h * k[0][i] - ydiff;
                    r1[i] = self.y[i];
                    r2[i] = ydiff;
                    r3[i] = bspl;
                    r4[i] = ydiff - h * k[6][i] - bspl;
                    r5[i] = h
                        * (D1 * k[0][i]
                            + D3 * k[2][i]
                            + D4 * k[3][i]
                            + D5 * k[4][i]
                            + D6 * k[5][i]
                            + D7 * k[6][i]);
                }
                let step = DenseStep {
                    t0: self.t,
                    h,
                    r1,
                    r2,
                    r3,
                    r4,
                    r5,
                };
                self.t += h;
                self.y = y_new;
                self.f_cur = f_new;
                self.steps_accepted += 1;
                // Step-size update ignores the clamp to t_limit.
                self.h = (self.h * factor).max(1e-14 * (1.0 + self.t.abs()));
                return Ok(step);
            }
            self.steps_rejected += 1;
            self.h *= factor;
            if self.h.abs() < 1e-14 * (1.0 + self.t.abs()) {
                return Err(CoreError::convergence(format!(
                    "integrator step size underflow at t = {} (local error {err:.3e})",
                    self.t
                )));
            }
        }
    }
}

/// Crude but serviceable initial step size (refined by the controller).
fn initial_step<S: OdeSystem<N>, const N: usize>(
    system: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    direction: f64,
    tol: &Tolerances,
) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * math::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    let d0 = math::sqrt(d0 / N as f64);
    let d1 = math::sqrt(d1 / N as f64);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    // One Euler probe to bound the second derivative.
    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += direction * h0 * f0[i];
    }
    let mut f1 = [0.0; N];
    system.rhs(t0 + direction * h0, &y1, &mut f1);
    let mut d2: f64 = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * math::abs(y0[i]);
        let d = (f1[i] - f0[i]) / sc;
        d2 += d * d;
    }
    let d2 = math::sqrt(d2 / N as f64) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        math::powf(0.01 / d1.max(d2), 0.2)
    };
    (100.0 * h0).min(h1)
}

/// Integrates from `t0` to `t1`, returning the final state.
pub fn integrate_to<S: OdeSystem<N>, const N: usize>(
    system: &S,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
) -> Result<[f64; N]> {
    if t0 == t1 {
        return Ok(y0);
    }
    let direction = if t1 > t0 { 1.0 } else { -1.0 };
    let mut ip = DormandPrince::new(system, t0, y0, direction, tol);
    while (t1 - ip.t) * direction > 0.0 {
        ip.step(t1)?;
    }
    Ok(ip.y)
}

/// Integrates from `t0` through the (sorted, monotone in the direction of
/// travel) output times `ts`, sampling states by dense output.
pub fn integrate_samples<S: OdeSystem<N>, const N: usize>(
    system: &S,
    t0: f64,
    y0: [f64; N],
    ts: &[f64],
    tol: Tolerances,
) -> Result<Vec<[f64; N]>> {
    let mut out = Vec::with_capacity(ts.len());
    if ts.is_empty() {
        return Ok(out);
    }
    let t_last = *ts.last().unwrap();
    let direction = if t_last >= t0 { 1.0 } else { -1.0 };
    let mut ip = DormandPrince::new(system, t0, y0, direction, tol);
    let mut idx = 0;
    while idx < ts.len() && (ts[idx] - t0) * direction <= 0.0 {
        out.push(y0);
        idx += 1;
    }
    while idx < ts.len() {
        let step = ip.step(t_last)?;
        while idx < ts.len() && (ts[idx] - ip.t) * direction <= 1e-300 {
            out.push(step.eval(ts[idx]));
            idx += 1;
        }
    }
    Ok(out)
}

/// Outcome of [`integrate_until_event`].
pub struct EventCrossing<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
}

/// Integrates forward until `event(t, y)` crosses zero in the requested
/// direction (`+1`: from negative to positive), then locates the crossing on
/// the dense interpolant by bisection. `t_start_check` suppresses crossings
/// before that time (useful when starting exactly on the section).
pub fn integrate_until_event<S: OdeSystem<N>, const N: usize>(
    system: &S,
    t0: f64,
    y0: [f64; N],
    t_max: f64,
    t_start_check: f64,
    event: impl Fn(f64, &[f64; N]) -> f64,
    tol: Tolerances,
) -> Result<Option<EventCrossing<N>>> {
    let mut ip = DormandPrince::new(system, t0, y0, 1.0, tol);
    let mut g_prev = event(t0, &y0);
    let mut t_prev = t0;
    while ip.t < t_max {
        let step = ip.step(t_max)?;
        let g_now = event(ip.t, &ip.y);
        if ip.t >= t_start_check && t_prev >= t_start_check && g_prev < 0.0 && g_now >= 0.0 {
            // Bisection on the dense interpolant.
            let (mut lo, mut hi) = (step.t0, step.t_end());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let ym = step.eval(mid);
                if event(mid, &ym) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-13 * (1.0 + hi.abs()) {
                    break;
                }
            }
            let t_hit = 0.5 * (lo + hi);
            return Ok(Some(EventCrossing {
                t: t_hit,
                y: step.eval(t_hit),
            }));
        }
        g_prev = g_now;
        t_prev = ip.t;
    }
    Ok(None)
}
