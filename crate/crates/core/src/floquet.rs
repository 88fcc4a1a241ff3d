//! Floquet analysis of spatially periodic perturbations of the uniform
//! oscillations: monodromy matrices of the variational system, multiplier
//! scans over the squared wavenumber, instability thresholds, and the
//! explicit Floquet decomposition `Phi(t) = P(t) e^{tB}` at `k = 0`.
//!
//! The variational system along the orbit `(u0, v0, w0)(t)`, for a
//! disturbance `(U, V, W) e^{ikx}`, is `y' = A(t; k^2) y` with
//!
//! ```text
//! A = - [ D_u k^2 + 1 - 2 w0,   2 u0,                0
//!         0,                    D_v k^2 + 1 - 2 u0,  2 v0
//!         2 w0,                 0,                   D_w k^2 + 1 - 2 v0 ]
//! ```
//!
//! (`u0 + v0 + w0 = 1` already folded in). Its trace is
//! `-1 - (D_u + D_v + D_w) k^2`, which fixes `det M` exactly and provides a
//! free consistency check on every monodromy computation.

use crate::error::{CoreError, Result};
use crate::linalg::{self, cabs, CVec3, Mat3, Vec3};
use crate::math;
use crate::ode::Tolerances;
use crate::orbit::{amplitude_from_period, PeriodicOrbit, T_MIN};
use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Diffusion coefficients of the three species.
///
/// The wavenumber can always be rescaled so that the largest coefficient is
/// 1; [`Diffusivities::normalized`] performs that reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusivities {
    pub du: f64,
    pub dv: f64,
    pub dw: f64,
}

impl Diffusivities {
    pub fn new(du: f64, dv: f64, dw: f64) -> Result<Self> {
        if !(du >= 0.0 && dv >= 0.0 && dw >= 0.0)
            || !(du.is_finite() && dv.is_finite() && dw.is_finite())
        {
            return Err(CoreError::domain(format!(
                "diffusivities must be finite and nonnegative, got ({du}, {dv}, {dw})"
            )));
        }
        Ok(Self { du, dv, dw })
    }

    pub fn sum(&self) -> f64 {
        self.du + self.dv + self.dw
    }

    pub fn max(&self) -> f64 {
        self.du.max(self.dv).max(self.dw)
    }

    /// `(D_u - D_v)^2 + (D_u - D_w)^2 + (D_v - D_w)^2`: the quadratic form
    /// multiplying the splitting coefficient in the long-wave eigenvalues.
    pub fn quadratic_form(&self) -> f64 {
        let a = self.du - self.dv;
        let b = self.du - self.dw;
        let c = self.dv - self.dw;
        a * a + b * b + c * c
    }

    /// Rescales so the largest coefficient is 1; returns the scaled triple
    /// and the factor by which `k^2` must be multiplied to compensate.
    pub fn normalized(&self) -> (Diffusivities, f64) {
        let m = self.max();
        if m == 0.0 {
            return (*self, 1.0);
        }
        (
            Diffusivities {
                du: self.du / m,
                dv: self.dv / m,
                dw: self.dw / m,
            },
            m,
        )
    }
}

/// Coefficient matrix of the variational system at one orbit point:
/// `-(diag(D) k^2 + L)` with `L` the reaction linearization on the
/// invariant plane.
pub fn variational_matrix(point: Vec3, k2: f64, d: &Diffusivities) -> Mat3 {
    let [u, v, w] = point;
    Mat3([
        [-(d.du * k2 + 1.0 - 2.0 * w), -2.0 * u, 0.0],
        [0.0, -(d.dv * k2 + 1.0 - 2.0 * u), -2.0 * v],
        [-2.0 * w, 0.0, -(d.dw * k2 + 1.0 - 2.0 * v)],
    ])
}

/// Right-hand side of the variational system: `-(diag(D) k^2 + L(t)) state`.
pub fn variational_rhs(state: Vec3, orbit_values: Vec3, k2: f64, d: &Diffusivities) -> Vec3 {
    variational_matrix(orbit_values, k2, d).mul_vec(state)
}

/// Monodromy matrix of the variational system at squared wavenumber `k2`,
/// with its certified multipliers.
#[derive(Debug, Clone)]
pub struct MonodromyResult {
    /// Conserved product of the underlying orbit; `None` for numerically
    /// continued orbits of the generalized system.
    pub a: Option<f64>,
    pub t_period: f64,
    pub k2: f64,
    pub m: Mat3,
    /// Multipliers sorted by descending modulus.
    pub multipliers: [Complex64; 3],
    /// Eigen-residuals `|M v - mu v|` for unit `v`, same order.
    pub residuals: [f64; 3],
    /// Relative defect of `det M` against `exp(-T (1 + sum(D) k^2))`.
    pub det_rel_err: f64,
    pub integ_tol: f64,
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(CoreError::domain(format!(
            "integration tolerance {tol} outside [1e-13, 1e-6]"
        )));
    }
    Ok(())
}

/// Eigenvalues of a monodromy matrix sorted by descending modulus, with
/// residual certification.
///
/// Certification is graded: resolvable, well-separated multipliers must
/// meet `|M v - mu v| <= 1e-8 |v|` (scaled to the matrix magnitude); a
/// near-multiple pair is held to the square-root (Jordan) bound instead;
/// multipliers below the f64 noise floor of the matrix (strongly damped
/// modes whose exact values underflow any cofactor arithmetic) are only
/// certified to be zero at that floor.
pub fn multipliers(m: &Mat3) -> Result<[Complex64; 3]> {
    if !m.is_finite() {
        return Err(CoreError::domain("monodromy matrix has non-finite entries"));
    }
    let pairs = linalg::eigen3(m);
    let scale = m.max_abs().max(1.0);
    for (i, p) in pairs.iter().enumerate() {
        let gap = (0..3)
            .filter(|&j| j != i)
            .map(|j| cabs(pairs[j].value - p.value))
            .fold(f64::INFINITY, f64::min);
        if cabs(p.value) <= 1e-6 * scale {
            // Below the noise floor of the matrix itself (strongly damped
            // modes over long periods): the magnitude already certifies
            // the multiplier as zero at that floor, and no meaningful
            // eigenvector residual exists for a numerically rank-deficient
            // direction.
            continue;
        }
        let tol = if gap <= 1e-4 * scale {
            1e-7 * scale
        } else {
            1e-8 * scale
        };
        if p.residual > tol {
            return Err(CoreError::convergence(format!(
                "eigen-residual {:.3e} exceeds {tol:.3e} for multiplier {} (gap {gap:.3e})",
                p.residual, p.value
            )));
        }
    }
    Ok([pairs[0].value, pairs[1].value, pairs[2].value])
}

/// Integrates the matrix variational equation over one period from the
/// identity and extracts the multipliers.
pub fn monodromy(
    orbit: &PeriodicOrbit,
    k2: f64,
    d: &Diffusivities,
    tol: f64,
) -> Result<MonodromyResult> {
    check_tol(tol)?;
    if !(k2.is_finite() && k2 >= 0.0) {
        return Err(CoreError::domain(format!("k^2 = {k2} must be nonnegative")));
    }
    let t_period = orbit.period();
    let m = integrate_transition(orbit, k2, d, 0.0, t_period, Mat3::IDENTITY, tol)?;
    finish_monodromy(Some(orbit.amplitude()), t_period, k2, d, m, tol)
}

pub(crate) fn finish_monodromy(
    a: Option<f64>,
    t_period: f64,
    k2: f64,
    d: &Diffusivities,
    m: Mat3,
    tol: f64,
) -> Result<MonodromyResult> {
    let mus = multipliers(&m)?;
    let pairs = linalg::eigen3(&m);
    let det_expected = math::exp(-t_period * (1.0 + d.sum() * k2));
    let det_rel_err = if det_expected != 0.0 {
        math::abs(m.det() - det_expected) / det_expected
    } else {
        f64::INFINITY
    };
    Ok(MonodromyResult {
        a,
        t_period,
        k2,
        m,
        multipliers: mus,
        residuals: [pairs[0].residual, pairs[1].residual, pairs[2].residual],
        det_rel_err,
        integ_tol: tol,
    })
}

/// Transition matrix of the variational system from `t0` to `t1` applied to
/// `phi0` (columns evolve independently under the 9-dimensional system).
pub(crate) fn integrate_transition(
    orbit: &PeriodicOrbit,
    k2: f64,
    d: &Diffusivities,
    t0: f64,
    t1: f64,
    phi0: Mat3,
    tol: f64,
) -> Result<Mat3> {
    let sys = |t: f64, y: &[f64; 9], dy: &mut [f64; 9]| {
        let a = variational_matrix(orbit.point(t), k2, d);
        for col in 0..3 {
            let x = [y[col], y[3 + col], y[6 + col]];
            let ax = a.mul_vec(x);
            dy[col] = ax[0];
            dy[3 + col] = ax[1];
            dy[6 + col] = ax[2];
        }
    };
    let y0 = flatten(&phi0);
    let y1 = crate::ode::integrate_to(&sys, t0, y0, t1, Tolerances::from_rtol(tol))?;
    Ok(unflatten(&y1))
}

pub(crate) fn flatten(m: &Mat3) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m.0[i][j];
        }
    }
    out
}

pub(crate) fn unflatten(y: &[f64; 9]) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = y[3 * i + j];
        }
    }
    Mat3(out)
}

/// One row of a wavenumber scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub k2: f64,
    pub abs_mu1: f64,
    pub re_mu1: f64,
    pub im_mu1: f64,
    pub abs_mu2: f64,
    /// The smallest multiplier; real to numerical precision.
    pub mu3: f64,
}

impl ScanPoint {
    pub fn from_result(r: &MonodromyResult) -> Self {
        Self {
            k2: r.k2,
            abs_mu1: cabs(r.multipliers[0]),
            re_mu1: r.multipliers[0].re,
            im_mu1: r.multipliers[0].im,
            abs_mu2: cabs(r.multipliers[1]),
            mu3: r.multipliers[2].re,
        }
    }
}

/// Multiplier summary on an ascending grid of squared wavenumbers.
pub fn scan_k2(
    orbit: &PeriodicOrbit,
    d: &Diffusivities,
    k2_grid: &[f64],
    tol: f64,
) -> Result<Vec<ScanPoint>> {
    if k2_grid.windows(2).any(|w| w[1] <= w[0]) || k2_grid.first().is_some_and(|&k| k < 0.0) {
        return Err(CoreError::domain(
            "k^2 grid must be ascending and nonnegative",
        ));
    }
    k2_grid
        .iter()
        .map(|&k2| monodromy(orbit, k2, d, tol).map(|r| ScanPoint::from_result(&r)))
        .collect()
}

fn abs_mu1(orbit: &PeriodicOrbit, d: &Diffusivities, k2: f64, tol: f64) -> Result<f64> {
    Ok(cabs(monodromy(orbit, k2, d, tol)?.multipliers[0]))
}

pub(crate) enum InteriorMax {
    /// Interior maximum located by golden-section refinement.
    At { k2: f64, abs_mu1: f64 },
    /// `|mu_1|` was largest at a bracket endpoint.
    Boundary { left: bool, abs_mu1: f64 },
}

/// Grid scan followed by golden-section refinement of the interior maximum
/// of `|mu_1|(k^2)`.
pub(crate) fn locate_interior_max(
    orbit: &PeriodicOrbit,
    d: &Diffusivities,
    bracket: (f64, f64),
    tol: f64,
) -> Result<InteriorMax> {
    const GRID: usize = 48;
    let (lo, hi) = bracket;
    if !(hi > lo && lo >= 0.0) {
        return Err(CoreError::domain(format!(
            "invalid k^2 bracket ({lo}, {hi})"
        )));
    }
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    let mut values = [0.0; GRID + 1];
    for (i, value) in values.iter_mut().enumerate() {
        let k2 = lo + (hi - lo) * i as f64 / GRID as f64;
        *value = abs_mu1(orbit, d, k2, tol)?;
        if *value > best {
            best = *value;
            best_i = i;
        }
    }
    if best_i == 0 || best_i == GRID {
        return Ok(InteriorMax::Boundary {
            left: best_i == 0,
            abs_mu1: best,
        });
    }
    // Golden-section maximization on the bracketing pair of grid cells.
    let golden = 0.5 * (3.0 - math::sqrt(5.0));
    let mut a = lo + (hi - lo) * (best_i - 1) as f64 / GRID as f64;
    let mut b = lo + (hi - lo) * (best_i + 1) as f64 / GRID as f64;
    let mut x1 = a + golden * (b - a);
    let mut x2 = b - golden * (b - a);
    let mut f1 = abs_mu1(orbit, d, x1, tol)?;
    let mut f2 = abs_mu1(orbit, d, x2, tol)?;
    while b - a > 1e-4 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - golden * (b - a);
            f2 = abs_mu1(orbit, d, x2, tol)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + golden * (b - a);
            f1 = abs_mu1(orbit, d, x1, tol)?;
        }
    }
    let (k2, abs) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    Ok(InteriorMax::At { k2, abs_mu1: abs })
}

/// Argmax of `|mu_1|(k^2)` inside the bracket, to 1e-4 in `k^2`.
pub fn max_multiplier(
    orbit: &PeriodicOrbit,
    d: &Diffusivities,
    k2_bracket: (f64, f64),
    tol: f64,
) -> Result<(f64, f64)> {
    match locate_interior_max(orbit, d, k2_bracket, tol)? {
        InteriorMax::At { k2, abs_mu1 } => Ok((k2, abs_mu1)),
        InteriorMax::Boundary { left, .. } => Err(CoreError::convergence(format!(
            "|mu_1| is maximal at the {} edge of the bracket {:?}; widen the bracket",
            if left { "left" } else { "right" },
            k2_bracket
        ))),
    }
}

/// Outcome of the critical-period search.
#[derive(Debug, Clone)]
pub enum CriticalOutcome {
    /// The threshold orbit: the interior maximum of `|mu_1|` crosses 1.
    Critical {
        t_star: f64,
        k_star2: f64,
        a_star: f64,
        /// The leading multiplier at `(T_*, k_*^2)`; real and close to -1
        /// (period doubling).
        mu_at_kstar: Complex64,
    },
    /// No instability found up to `t_max`.
    StableUpTo { t_max: f64, max_abs_mu1: f64 },
}

/// Default upper end of the critical-period probe.
pub const DEFAULT_T_MAX: f64 = 200.0;

/// Default `k^2` bracket for interior-maximum searches.
pub const DEFAULT_K2_BRACKET: (f64, f64) = (0.02, 3.0);

/// Locates the critical period `T_*` where the interior maximum of
/// `|mu_1|(k^2)` first reaches 1, by probe doubling from just above the
/// minimum period followed by bisection in `T` until
/// `|max |mu_1| - 1| < 1e-3`.
pub fn critical_period(d: &Diffusivities, t_max: f64, tol: f64) -> Result<CriticalOutcome> {
    let excess = |t: f64| -> Result<(f64, f64)> {
        let orbit = PeriodicOrbit::from_period(t)?;
        match locate_interior_max(&orbit, d, DEFAULT_K2_BRACKET, tol)? {
            InteriorMax::At { k2, abs_mu1 } => Ok((abs_mu1 - 1.0, k2)),
            // A boundary maximum below 1 still answers the stability
            // question for this probe.
            InteriorMax::Boundary { abs_mu1, .. } => Ok((abs_mu1 - 1.0, f64::NAN)),
        }
    };

    let mut t_lo = 1.2 * T_MIN;
    let (e_first, _) = excess(t_lo)?;
    if e_first > 0.0 {
        return Err(CoreError::domain(format!(
            "already unstable at T = {t_lo}; no onset to bracket above the minimum period"
        )));
    }
    let mut t_hi = t_lo;
    let mut e_hi = e_first;
    loop {
        if t_hi >= t_max {
            return Ok(CriticalOutcome::StableUpTo {
                t_max: t_hi,
                max_abs_mu1: e_hi + 1.0,
            });
        }
        t_hi = (2.0 * t_hi).min(t_max);
        let (e, _) = excess(t_hi)?;
        e_hi = e;
        if e_hi > 0.0 {
            break;
        }
        t_lo = t_hi;
    }

    // Bisection on the sign of (max |mu_1| - 1).
    let mut result = None;
    for _ in 0..60 {
        let mid = 0.5 * (t_lo + t_hi);
        let (e, k2) = excess(mid)?;
        if math::abs(e) < 1e-3 {
            result = Some((mid, k2));
            break;
        }
        if e > 0.0 {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
        if t_hi - t_lo < 1e-6 {
            break;
        }
    }
    let (t_star, k_star2) = match result {
        Some((t, k)) if k.is_finite() => (t, k),
        _ => {
            // Fell through on interval width: evaluate once more at the
            // midpoint for the final (k*, mu) pair.
            let mid = 0.5 * (t_lo + t_hi);
            let (_, k2) = excess(mid)?;
            if !k2.is_finite() {
                return Err(CoreError::convergence(
                    "critical-period bisection lost the interior maximum",
                ));
            }
            (mid, k2)
        }
    };
    let orbit = PeriodicOrbit::from_period(t_star)?;
    let mr = monodromy(&orbit, k_star2, d, tol)?;
    Ok(CriticalOutcome::Critical {
        t_star,
        k_star2,
        a_star: amplitude_from_period(t_star)?,
        mu_at_kstar: mr.multipliers[0],
    })
}

/// The `k = 0` Floquet structure: initial vectors of the three fundamental
/// solutions, the secular constant, and a sampler for the periodic matrix
/// `P(t)` of the decomposition `Phi(t) = P(t) e^{tB}`.
///
/// Normalization: `y1` is the raw orbit derivative at `t = 0`; `y2` is
/// orthogonal to `y1` with `|y2| = |y1|`, oriented so that it points toward
/// lower `A` (larger orbits, longer periods), which makes the secular
/// constant negative; `y3` spans the decaying direction, scaled so its
/// components sum to 1 (the sum of any solution decays exactly like
/// `e^{-t}`, so this sum stays 1 on the periodic part).
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    pub y1: Vec3,
    pub y2: Vec3,
    pub y3: Vec3,
    /// Secular constant: the second solution is `p2(t) + c t x1(t)`.
    pub c: f64,
    pub t_period: f64,
    /// Residual of the Jordan solve `(M - I) y2 = cT y1`.
    pub jordan_residual: f64,
    orbit: PeriodicOrbit,
    tol: f64,
}

/// Diffusion-free coefficient matrix sampler shared by the decomposition
/// helpers.
fn k0_matrix(orbit: &PeriodicOrbit, t: f64) -> Mat3 {
    variational_matrix(orbit.point(t), 0.0, &Diffusivities {
        du: 0.0,
        dv: 0.0,
        dw: 0.0,
    })
}

impl FloquetDecomposition {
    pub fn orbit(&self) -> &PeriodicOrbit {
        &self.orbit
    }

    /// The constant matrix of the decomposition `Phi(t) = P(t) e^{tB}` in
    /// the basis of the three fundamental solutions: a Jordan block of the
    /// double zero exponent coupled by the secular constant, plus the
    /// decaying exponent -1.
    pub fn b_matrix(&self) -> Mat3 {
        Mat3([[0.0, self.c, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    }

    /// Samples `P(t)` on `n` uniformly spaced points `t_i = i T / n`,
    /// `i = 0..n` inclusive (so the last sample tests periodicity).
    ///
    /// Columns 1 and 2 come from one forward pass of the two neutral
    /// solutions; column 3 from one backward pass of `p3' = (A + I) p3`
    /// from `p3(T) = y3`, which is the stable direction of integration for
    /// the decaying solution (forward integration would lose it to the
    /// neutral modes once `e^{t}` exceeds the inverse integration error).
    pub fn sample_grid(&self, n: usize) -> Result<Vec<(f64, Mat3)>> {
        let t_period = self.t_period;
        let ts: Vec<f64> = (0..=n).map(|i| t_period * i as f64 / n as f64).collect();
        let fwd = self.forward_columns(&ts)?;
        let back = self.backward_column(&ts)?;
        Ok(ts
            .iter()
            .zip(fwd)
            .zip(back)
            .map(|((&t, (c1, c2)), c3)| (t, Mat3::from_columns(c1, c2, c3)))
            .collect())
    }

    /// `P(t)` at one time, `0 <= t <= 2T`.
    pub fn p_at(&self, t: f64) -> Result<Mat3> {
        if !(0.0..=2.0 * self.t_period).contains(&t) {
            return Err(CoreError::domain(format!(
                "P(t) sampler supports t in [0, 2T], got {t}"
            )));
        }
        let (c1, c2) = {
            let cols = self.forward_columns(&[t])?;
            cols[0]
        };
        let c3 = self.backward_column(&[t])?[0];
        Ok(Mat3::from_columns(c1, c2, c3))
    }

    /// Forward integration of `(x1, x2)` with the secular part removed:
    /// columns `Phi(t) y1` and `Phi(t) y2 - c t Phi(t) y1`.
    fn forward_columns(&self, ts: &[f64]) -> Result<Vec<(Vec3, Vec3)>> {
        let orbit = self.orbit.clone();
        let sys = move |t: f64, y: &[f64; 6], dy: &mut [f64; 6]| {
            let a = k0_matrix(&orbit, t);
            let x1 = a.mul_vec([y[0], y[1], y[2]]);
            let x2 = a.mul_vec([y[3], y[4], y[5]]);
            dy[..3].copy_from_slice(&x1);
            dy[3..].copy_from_slice(&x2);
        };
        let y0 = [
            self.y1[0], self.y1[1], self.y1[2], self.y2[0], self.y2[1], self.y2[2],
        ];
        let states =
            crate::ode::integrate_samples(&sys, 0.0, y0, ts, Tolerances::from_rtol(self.tol))?;
        Ok(ts
            .iter()
            .zip(states)
            .map(|(&t, s)| {
                let x1 = [s[0], s[1], s[2]];
                let x2 = [s[3], s[4], s[5]];
                (x1, linalg::vec_sub(x2, linalg::vec_scale(x1, self.c * t)))
            })
            .collect())
    }

    /// Backward integration of the shифted system for the periodic part of
    /// the decaying solution: `p3(t) = e^{t} Phi(t) y3`.
    fn backward_column(&self, ts: &[f64]) -> Result<Vec<Vec3>> {
        let orbit = self.orbit.clone();
        let sys = move |t: f64, y: &[f64; 3], dy: &mut [f64; 3]| {
            let a = k0_matrix(&orbit, t);
            let ax = a.mul_vec(*y);
            dy[0] = ax[0] + y[0];
            dy[1] = ax[1] + y[1];
            dy[2] = ax[2] + y[2];
        };
        // Start at the first multiple of T at or above the last requested
        // time; p3 is T-periodic so p3(mT) = y3.
        let t_last = ts.last().copied().unwrap_or(0.0);
        let m = math::ceil(t_last / self.t_period).max(1.0);
        let t_start = m * self.t_period;
        let mut rev: Vec<f64> = ts.to_vec();
        rev.reverse();
        let states = crate::ode::integrate_samples(
            &sys,
            t_start,
            self.y3,
            &rev,
            Tolerances::from_rtol(self.tol),
        )?;
        let mut out: Vec<Vec3> = states.into_iter().collect();
        out.reverse();
        Ok(out)
    }
}

/// Builds the `k = 0` Floquet decomposition from the monodromy matrix.
pub fn floquet_decompose(orbit: &PeriodicOrbit, tol: f64) -> Result<FloquetDecomposition> {
    check_tol(tol)?;
    let t_period = orbit.period();
    let d0 = Diffusivities {
        du: 0.0,
        dv: 0.0,
        dw: 0.0,
    };
    let mr = monodromy(orbit, 0.0, &d0, tol)?;
    let m = mr.m;

    // Tangent solution: exact initial vector.
    let y1 = orbit.derivative(0.0);
    let n1 = linalg::norm(y1);

    // Decaying solution: eigenvector of the smallest multiplier, realified
    // and scaled so that its components sum to 1.
    let pairs = linalg::eigen3(&m);
    let y3 = realify(&pairs[2].vector)?;
    let s3 = y3[0] + y3[1] + y3[2];
    if math::abs(s3) < 1e-9 {
        return Err(CoreError::convergence(
            "decaying eigenvector has near-zero component sum; cannot normalize",
        ));
    }
    let y3 = linalg::vec_scale(y3, 1.0 / s3);

    // Jordan partner: solve (M - I) y2 = gamma y1 with y2 restricted to the
    // orthogonal complement of y1. Unknowns (a2, a3, gamma) form the null
    // vector of G = [N q2, N q3, -y1].
    let q1 = linalg::vec_scale(y1, 1.0 / n1);
    let (q2, q3) = orthonormal_complement(q1);
    let n_mat = m.sub(&Mat3::IDENTITY);
    let g = Mat3::from_columns(n_mat.mul_vec(q2), n_mat.mul_vec(q3), linalg::vec_scale(y1, -1.0));
    let null = real_null_vector(&g);
    let (a2, a3, gamma) = (null[0], null[1], null[2]);
    let y2_raw = linalg::vec_add(linalg::vec_scale(q2, a2), linalg::vec_scale(q3, a3));
    let n2_raw = linalg::norm(y2_raw);
    if n2_raw < 1e-12 {
        return Err(CoreError::convergence(
            "Jordan solve returned a degenerate second vector",
        ));
    }
    // Residual of the defining relation, scaled to the matrix size.
    let resid_vec = linalg::vec_sub(n_mat.mul_vec(y2_raw), linalg::vec_scale(y1, gamma));
    let scale = m.max_abs().max(1.0) * n2_raw.max(n1);
    let jordan_residual = linalg::norm(resid_vec) / scale;
    if jordan_residual > 1e-6 {
        return Err(CoreError::convergence(format!(
            "Jordan solve residual {jordan_residual:.3e} (> 1e-6): the unit-multiplier pair is \
             too ill-conditioned at this tolerance (condition estimate {:.3e})",
            1.0 / jordan_residual.max(1e-300)
        )));
    }

    // Orientation: point y2 toward lower A (larger orbits). The gradient of
    // the conserved product at the section point is (v w, u w, u v).
    let [u, v, w] = orbit.point(0.0);
    let grad_a = [v * w, u * w, u * v];
    let sign = if linalg::dot(grad_a, y2_raw) > 0.0 {
        -1.0
    } else {
        1.0
    };
    let scale2 = sign * n1 / n2_raw;
    let y2 = linalg::vec_scale(y2_raw, scale2);
    let c = gamma * scale2 / t_period;

    Ok(FloquetDecomposition {
        y1,
        y2,
        y3,
        c,
        t_period,
        jordan_residual,
        orbit: orbit.clone(),
        tol,
    })
}

/// Strips the arbitrary complex phase off an eigenvector that should be
/// real (simple real eigenvalue).
fn realify(v: &CVec3) -> Result<Vec3> {
    let mut k = 0;
    for i in 1..3 {
        if cabs(v[i]) > cabs(v[k]) {
            k = i;
        }
    }
    let phase = v[k] / cabs(v[k]);
    let mut out = [0.0; 3];
    let mut imag: f64 = 0.0;
    for i in 0..3 {
        let z = v[i] / phase;
        out[i] = z.re;
        imag = imag.max(math::abs(z.im));
    }
    if imag > 1e-6 {
        return Err(CoreError::convergence(format!(
            "eigenvector expected real has imaginary residue {imag:.3e}"
        )));
    }
    Ok(out)
}

/// Two unit vectors completing `q1` to an orthonormal basis.
fn orthonormal_complement(q1: Vec3) -> (Vec3, Vec3) {
    // Seed with the coordinate axis least aligned with q1.
    let mut k = 0;
    for i in 1..3 {
        if math::abs(q1[i]) < math::abs(q1[k]) {
            k = i;
        }
    }
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let proj = linalg::dot(e, q1);
    let mut q2 = linalg::vec_sub(e, linalg::vec_scale(q1, proj));
    q2 = linalg::vec_scale(q2, 1.0 / linalg::norm(q2));
    let q3 = [
        q1[1] * q2[2] - q1[2] * q2[1],
        q1[2] * q2[0] - q1[0] * q2[2],
        q1[0] * q2[1] - q1[1] * q2[0],
    ];
    (q2, q3)
}

/// Null vector of a (numerically) singular real 3x3 matrix: the largest
/// cross product of two rows.
fn real_null_vector(g: &Mat3) -> Vec3 {
    let r = [g.row(0), g.row(1), g.row(2)];
    let cands = [
        cross_r(r[0], r[1]),
        cross_r(r[1], r[2]),
        cross_r(r[0], r[2]),
    ];
    let mut best = cands[0];
    for c in &cands[1..] {
        if linalg::norm(*c) > linalg::norm(best) {
            best = *c;
        }
    }
    linalg::vec_scale(best, 1.0 / linalg::norm(best))
}

fn cross_r(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// The in-plane second solution by variation of parameters:
///
/// ```text
/// U2(t) = -2 C2 u0'(t) int_a^t u0 / u0'^2 dtau,
/// V2    = (C2 + v0' U2) / u0',
/// W2    = -U2 - V2,
/// ```
///
/// with `C2 = -1/2`. Valid only on windows free of turning points of `u0`
/// (the quadrature representation changes integration constant across each
/// turning point); the anchor at the window start fixes the admixture of
/// the tangent solution, which callers must project out before comparing
/// against the monodromy-based second solution.
pub fn analytic_second_solution(
    orbit: &PeriodicOrbit,
    t_interval: (f64, f64),
    n_samples: usize,
) -> Result<Vec<(f64, Vec3)>> {
    analytic_second_solution_with_c2(orbit, t_interval, n_samples, -0.5)
}

/// As [`analytic_second_solution`] with an explicit conserved constant.
pub fn analytic_second_solution_with_c2(
    orbit: &PeriodicOrbit,
    t_interval: (f64, f64),
    n_samples: usize,
    c2: f64,
) -> Result<Vec<(f64, Vec3)>> {
    let t_period = orbit.period();
    let (a, b) = t_interval;
    let radius = 0.05 * t_period;
    // Turning points of u0 sit at multiples of T/2.
    let clear = |t: f64| {
        let r = t - math::round(t / (0.5 * t_period)) * 0.5 * t_period;
        math::abs(r) >= radius
    };
    if !(b > a
        && clear(a)
        && clear(b)
        && math::floor(a / (0.5 * t_period)) == math::floor(b / (0.5 * t_period)))
    {
        return Err(CoreError::domain(format!(
            "interval ({a}, {b}) must stay within one turning-point-free window \
             (radius {radius:.3}) of the half-period"
        )));
    }
    if n_samples < 2 {
        return Err(CoreError::domain("need at least two samples"));
    }

    let integrand = |t: f64| {
        let u = orbit.u_component(t);
        let du = orbit.derivative(t)[0];
        u / (du * du)
    };
    let mut out = Vec::with_capacity(n_samples);
    let mut acc = 0.0;
    let mut t_prev = a;
    for i in 0..n_samples {
        let t = a + (b - a) * i as f64 / (n_samples - 1) as f64;
        if t > t_prev {
            acc += gauss_legendre_16(&integrand, t_prev, t);
            t_prev = t;
        }
        let du = orbit.derivative(t)[0];
        let dv = orbit.derivative(t)[1];
        let u2 = -2.0 * c2 * du * acc;
        let v2 = (c2 + dv * u2) / du;
        let w2 = -u2 - v2;
        out.push((t, [u2, v2, w2]));
    }
    Ok(out)
}

/// 16-point Gauss-Legendre quadrature on `[a, b]` (smooth integrands only).
fn gauss_legendre_16(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 8] = [
        0.095_012_509_837_637_44,
        0.281_603_550_779_258_9,
        0.458_016_777_657_227_4,
        0.617_876_244_402_643_7,
        0.755_404_408_355_003,
        0.865_631_202_387_831_7,
        0.944_575_023_073_232_6,
        0.989_400_934_991_649_9,
    ];
    const W: [f64; 8] = [
        0.189_450_610_455_068_5,
        0.182_603_415_044_923_6,
        0.169_156_519_395_002_5,
        0.149_595_988_816_576_7,
        0.124_628_971_255_534,
        0.095_158_511_682_492_79,
        0.062_253_523_938_647_89,
        0.027_152_459_411_754_095,
    ];
    // Subdivide to keep panels short relative to the period scale.
    let n_panels = math::ceil((b - a) / 0.05).max(1.0) as usize;
    let mut total = 0.0;
    for p in 0..n_panels {
        let pa = a + (b - a) * p as f64 / n_panels as f64;
        let pb = a + (b - a) * (p + 1) as f64 / n_panels as f64;
        let mid = 0.5 * (pa + pb);
        let half = 0.5 * (pb - pa);
        let mut acc = 0.0;
        for i in 0..8 {
            acc += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
        }
        total += acc * half;
    }
    total
}
