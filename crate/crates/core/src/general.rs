//! The asymmetric three-species family
//!
//! ```text
//! u' = u (1 - u - a1 v - b1 w)
//! v' = v (1 - v - b2 u - a2 w)
//! w' = w (1 - w - a3 u - b3 v)
//! ```
//!
//! which carries an attracting two-dimensional manifold with a continuum of
//! periodic orbits exactly when
//!
//! ```text
//! (a1 - 1)(a2 - 1)(a3 - 1) = (1 - b1)(1 - b2)(1 - b3),
//! 0 <= b_i < 1 < a_i.
//! ```
//!
//! No closed form exists off the symmetric case, so orbits are located by
//! relaxation onto the manifold followed by a Poincare first-return map,
//! and stored as dense cubic-Hermite samples. The Floquet machinery then
//! runs on the full reaction Jacobian (the `u + v + w = 1` simplification
//! of the symmetric case does not apply).

use crate::error::{CoreError, Result};
use crate::floquet::{check_tol, finish_monodromy, Diffusivities, MonodromyResult};
use crate::linalg::{self, Mat3, Vec3};
use crate::math;
use crate::ode::{integrate_samples, integrate_to, integrate_until_event, Tolerances};
use alloc::format;
use alloc::vec::Vec;

/// Competition coefficients of the asymmetric family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralParams {
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
}

impl GeneralParams {
    pub fn new(alpha: [f64; 3], beta: [f64; 3]) -> Result<Self> {
        for v in alpha.iter().chain(beta.iter()) {
            if !v.is_finite() {
                return Err(CoreError::domain("competition coefficients must be finite"));
            }
        }
        Ok(Self { alpha, beta })
    }

    /// The symmetric May-Leonard case.
    pub fn symmetric() -> Self {
        Self {
            alpha: [2.0; 3],
            beta: [0.0; 3],
        }
    }

    /// Whether the coefficients sit in the continuum regime
    /// `0 <= b_i < 1 < a_i`.
    pub fn in_continuum_regime(&self) -> bool {
        self.alpha.iter().all(|&a| a > 1.0) && self.beta.iter().all(|&b| (0.0..1.0).contains(&b))
    }

    /// Reaction vector field.
    pub fn reaction(&self, x: Vec3) -> Vec3 {
        let [u, v, w] = x;
        let [a1, a2, a3] = self.alpha;
        let [b1, b2, b3] = self.beta;
        [
            u * (1.0 - u - a1 * v - b1 * w),
            v * (1.0 - v - b2 * u - a2 * w),
            w * (1.0 - w - a3 * u - b3 * v),
        ]
    }

    /// Jacobian of the reaction terms.
    pub fn jacobian(&self, x: Vec3) -> Mat3 {
        let [u, v, w] = x;
        let [a1, a2, a3] = self.alpha;
        let [b1, b2, b3] = self.beta;
        Mat3([
            [1.0 - 2.0 * u - a1 * v - b1 * w, -a1 * u, -b1 * u],
            [-b2 * v, 1.0 - 2.0 * v - b2 * u - a2 * w, -a2 * v],
            [-a3 * w, -b3 * w, 1.0 - 2.0 * w - a3 * u - b3 * v],
        ])
    }

    /// Interior coexistence equilibrium.
    pub fn coexistence(&self) -> Result<Vec3> {
        let [a1, a2, a3] = self.alpha;
        let [b1, b2, b3] = self.beta;
        let m = Mat3([[1.0, a1, b1], [b2, 1.0, a2], [a3, b3, 1.0]]);
        let x = linalg::solve3(&m, [1.0, 1.0, 1.0])
            .ok_or_else(|| CoreError::domain("competition matrix is singular"))?;
        if x.iter().any(|&c| c <= 0.0) {
            return Err(CoreError::domain(
                "no positive interior equilibrium for these coefficients",
            ));
        }
        Ok(x)
    }
}

/// Signed residual of the continuum condition
/// `(a1-1)(a2-1)(a3-1) - (1-b1)(1-b2)(1-b3)`; zero (to rounding) means the
/// attracting manifold carries a continuum of periodic orbits.
pub fn check_continuum(params: &GeneralParams) -> f64 {
    let [a1, a2, a3] = params.alpha;
    let [b1, b2, b3] = params.beta;
    (a1 - 1.0) * (a2 - 1.0) * (a3 - 1.0) - (1.0 - b1) * (1.0 - b2) * (1.0 - b3)
}

/// Default transient discarded before the return-map search.
pub const DEFAULT_TRANSIENT: f64 = 50.0;
/// Samples stored per period for the orbit interpolant.
pub const ORBIT_SAMPLES: usize = 4096;

/// A numerically located periodic orbit of the general system: dense
/// cubic-Hermite samples over one period.
#[derive(Debug, Clone)]
pub struct NumericOrbit {
    params: GeneralParams,
    t_period: f64,
    /// `ORBIT_SAMPLES + 1` equally spaced `(x, x')` pairs over `[0, T]`.
    samples: Vec<(Vec3, Vec3)>,
    closure_gap: f64,
}

impl NumericOrbit {
    pub fn period(&self) -> f64 {
        self.t_period
    }

    pub fn params(&self) -> &GeneralParams {
        &self.params
    }

    /// Achieved `|x(T) - x(0)|`.
    pub fn closure_gap(&self) -> f64 {
        self.closure_gap
    }

    /// Orbit point by cubic Hermite interpolation (period-wrapped).
    pub fn point(&self, t: f64) -> Vec3 {
        let n = self.samples.len() - 1;
        let h = self.t_period / n as f64;
        let mut tm = t - self.t_period * math::floor(t / self.t_period);
        if tm < 0.0 {
            tm = 0.0;
        }
        let mut i = (tm / h) as usize;
        if i >= n {
            i = n - 1;
        }
        let th = (tm - i as f64 * h) / h;
        let (x0, d0) = self.samples[i];
        let (x1, d1) = self.samples[i + 1];
        let h00 = (2.0 * th - 3.0) * th * th + 1.0;
        let h10 = ((th - 2.0) * th + 1.0) * th;
        let h01 = (3.0 - 2.0 * th) * th * th;
        let h11 = (th - 1.0) * th * th;
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = h00 * x0[c] + h10 * h * d0[c] + h01 * x1[c] + h11 * h * d1[c];
        }
        out
    }

    pub fn derivative(&self, t: f64) -> Vec3 {
        self.params.reaction(self.point(t))
    }
}

/// Relaxes a seed onto the attracting manifold and locates the periodic
/// orbit through it by a Poincare first-return map.
///
/// The section is the plane through the relaxed point with normal along
/// the flow; returns are iterated until two consecutive periods agree to
/// 1e-8 (relative), then one period is sampled densely. The returned orbit
/// satisfies `|x(T) - x(0)| < closure_tol`.
pub fn find_periodic_orbit(
    params: &GeneralParams,
    seed: Vec3,
    closure_tol: f64,
) -> Result<NumericOrbit> {
    let residual = check_continuum(params);
    if math::abs(residual) >= 1e-10 {
        return Err(CoreError::domain(format!(
            "continuum condition violated (residual {residual:.3e}); \
             the system has no periodic orbits to locate"
        )));
    }
    if !params.in_continuum_regime() {
        return Err(CoreError::domain(
            "competition coefficients outside the regime 0 <= beta < 1 < alpha",
        ));
    }
    if seed.iter().any(|&c| c <= 0.0) {
        return Err(CoreError::domain("seed must lie in the open positive octant"));
    }
    let tol = Tolerances {
        rtol: 1e-11,
        atol: 1e-13,
    };
    let sys = |_t: f64, y: &[f64; 3], dy: &mut [f64; 3]| {
        *dy = params.reaction(*y);
    };

    // Transient relaxation onto the manifold.
    let x_p = integrate_to(&sys, 0.0, seed, DEFAULT_TRANSIENT, tol)?;
    let f_p = params.reaction(x_p);
    let speed = linalg::norm(f_p);
    if speed < 1e-10 {
        return Err(CoreError::domain(
            "seed relaxed onto an equilibrium; no periodic orbit through it",
        ));
    }
    let normal = linalg::vec_scale(f_p, 1.0 / speed);
    let event = |_t: f64, y: &[f64; 3]| linalg::dot(linalg::vec_sub(*y, x_p), normal);

    // Iterate returns until the period stabilizes. Close to the
    // heteroclinic boundary the continuum is neutrally stable and
    // integration error drifts the trajectory across neighboring orbits,
    // so consecutive returns never agree better than a drift floor; accept
    // that floor (the closure check below remains the hard gate).
    const T_MAX_RETURN: f64 = 2000.0;
    const RETURN_AGREEMENT: f64 = 1e-8;
    const RETURN_DRIFT_FLOOR: f64 = 1e-4;
    let mut anchor = x_p;
    let mut t_prev: Option<f64> = None;
    let mut t_period = 0.0;
    let mut best_agreement = f64::INFINITY;
    let mut converged = false;
    for _ in 0..24 {
        let hit = integrate_until_event(&sys, 0.0, anchor, T_MAX_RETURN, 1e-3, &event, tol)?
            .ok_or_else(|| {
                CoreError::convergence(format!(
                    "no return to the section within {T_MAX_RETURN} time units; \
                     the seed may lie in a non-oscillatory basin"
                ))
            })?;
        t_period = hit.t;
        anchor = hit.y;
        if let Some(prev) = t_prev {
            let agreement = math::abs(t_period - prev) / t_period;
            best_agreement = best_agreement.min(agreement);
            if agreement < RETURN_AGREEMENT {
                converged = true;
                break;
            }
        }
        t_prev = Some(t_period);
    }
    if !converged && best_agreement > RETURN_DRIFT_FLOOR {
        return Err(CoreError::convergence(format!(
            "return times did not stabilize (best consecutive agreement \
             {best_agreement:.3e} relative)"
        )));
    }

    // Dense sampling of the converged cycle.
    let ts: Vec<f64> = (0..=ORBIT_SAMPLES)
        .map(|i| t_period * i as f64 / ORBIT_SAMPLES as f64)
        .collect();
    let states = integrate_samples(&sys, 0.0, anchor, &ts, tol)?;
    let samples: Vec<(Vec3, Vec3)> = states
        .into_iter()
        .map(|x| (x, params.reaction(x)))
        .collect();
    let closure_gap = linalg::norm(linalg::vec_sub(samples[ORBIT_SAMPLES].0, samples[0].0));
    if closure_gap >= closure_tol {
        return Err(CoreError::convergence(format!(
            "orbit closure gap {closure_gap:.3e} exceeds the requested {closure_tol:.3e}"
        )));
    }
    Ok(NumericOrbit {
        params: *params,
        t_period,
        samples,
        closure_gap,
    })
}

/// Seed on the ray from the coexistence point toward the `u` vertex
/// `(1, 0, 0)`, at fraction `ray` in `(0, 1)`.
pub fn seed_on_ray(params: &GeneralParams, ray: f64) -> Result<Vec3> {
    if !(0.0 < ray && ray < 1.0) {
        return Err(CoreError::domain(format!(
            "ray fraction {ray} must lie strictly between 0 and 1"
        )));
    }
    let xc = params.coexistence()?;
    Ok([
        xc[0] + ray * (1.0 - xc[0]),
        xc[1] * (1.0 - ray),
        xc[2] * (1.0 - ray),
    ])
}

/// Bisection on the seed-ray fraction for an orbit with the requested
/// period (periods grow monotonically toward the heteroclinic boundary).
pub fn find_orbit_with_period(
    params: &GeneralParams,
    t_target: f64,
    t_tol: f64,
    closure_tol: f64,
) -> Result<NumericOrbit> {
    let orbit_at = |ray: f64| -> Result<NumericOrbit> {
        find_periodic_orbit(params, seed_on_ray(params, ray)?, closure_tol)
    };
    let mut lo = 0.05;
    let mut hi = 0.99;
    let t_lo = orbit_at(lo)?.period();
    if t_lo > t_target {
        return Err(CoreError::domain(format!(
            "period {t_target} is below the inner-ray period {t_lo:.3}"
        )));
    }
    // Walk the upper end inward (doubling its distance from the boundary)
    // while the outermost seeds fail to produce a clean orbit.
    let t_hi = loop {
        match orbit_at(hi) {
            Ok(o) => break o.period(),
            Err(_) if hi > 0.6 => hi = 1.0 - 2.0 * (1.0 - hi),
            Err(e) => return Err(e),
        }
    };
    if t_hi < t_target {
        return Err(CoreError::domain(format!(
            "period {t_target} exceeds the outer-ray period {t_hi:.3}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let orbit = orbit_at(mid)?;
        let t = orbit.period();
        if math::abs(t - t_target) < t_tol {
            return Ok(orbit);
        }
        if t < t_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(CoreError::convergence(format!(
        "seed-ray bisection did not reach period {t_target} within {t_tol}"
    )))
}

/// Monodromy matrix of the general variational system
/// `y' = (J(x0(t)) - diag(D) k^2) y` along a numeric orbit, together with
/// the Abel defect computed from the integrated trace of `J`.
pub fn general_monodromy(
    orbit: &NumericOrbit,
    k2: f64,
    d: &Diffusivities,
    tol: f64,
) -> Result<MonodromyResult> {
    check_tol(tol)?;
    if !(k2.is_finite() && k2 >= 0.0) {
        return Err(CoreError::domain(format!("k^2 = {k2} must be nonnegative")));
    }
    let params = orbit.params;
    let t_period = orbit.period();
    // Ten components: the 3x3 transition matrix plus the running integral
    // of tr J for the generalized Abel identity.
    let sys = |t: f64, y: &[f64; 10], dy: &mut [f64; 10]| {
        let x = orbit.point(t);
        let mut a = params.jacobian(x);
        a.0[0][0] -= d.du * k2;
        a.0[1][1] -= d.dv * k2;
        a.0[2][2] -= d.dw * k2;
        for col in 0..3 {
            let v = [y[col], y[3 + col], y[6 + col]];
            let av = a.mul_vec(v);
            dy[col] = av[0];
            dy[3 + col] = av[1];
            dy[6 + col] = av[2];
        }
        dy[9] = a.trace() + (d.du + d.dv + d.dw) * k2;
    };
    let mut y0 = [0.0; 10];
    y0[0] = 1.0;
    y0[4] = 1.0;
    y0[8] = 1.0;
    let y1 = integrate_to(&sys, 0.0, y0, t_period, Tolerances::from_rtol(tol))?;
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = y1[3 * i + j];
        }
    }
    let m = Mat3(m);
    let trace_integral = y1[9];

    let mut result = finish_monodromy(None, t_period, k2, d, m, tol)?;
    // Replace the symmetric-case determinant reference by the general one:
    // det M = exp(int tr J dt - T sum(D) k^2).
    let det_expected = math::exp(trace_integral - t_period * d.sum() * k2);
    result.det_rel_err = if det_expected != 0.0 {
        math::abs(m.det() - det_expected) / det_expected
    } else {
        f64::INFINITY
    };
    Ok(result)
}

/// Multiplier summary over a `k^2` grid for the general system.
pub fn general_scan_k2(
    orbit: &NumericOrbit,
    d: &Diffusivities,
    k2_grid: &[f64],
    tol: f64,
) -> Result<Vec<crate::floquet::ScanPoint>> {
    if k2_grid.windows(2).any(|w| w[1] <= w[0]) || k2_grid.first().is_some_and(|&k| k < 0.0) {
        return Err(CoreError::domain(
            "k^2 grid must be ascending and nonnegative",
        ));
    }
    k2_grid
        .iter()
        .map(|&k2| {
            general_monodromy(orbit, k2, d, tol).map(|r| crate::floquet::ScanPoint::from_result(&r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cabs;
    use crate::orbit::PeriodicOrbit;
    use num_complex::Complex64;

    const TOL: f64 = 1e-10;

    fn fig10_params() -> GeneralParams {
        GeneralParams::new([10.0, 4.0, 28.0 / 27.0], [0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn continuum_residual_examples() {
        assert_eq!(check_continuum(&GeneralParams::symmetric()), 0.0);
        assert!(check_continuum(&fig10_params()).abs() < 1e-12);
        let broken = GeneralParams::new([2.0, 2.0, 2.0], [0.5, 0.0, 0.0]).unwrap();
        assert!((check_continuum(&broken) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coexistence_of_symmetric_system() {
        let xc = GeneralParams::symmetric().coexistence().unwrap();
        for c in xc {
            assert!((c - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn refuses_params_without_continuum() {
        let broken = GeneralParams::new([2.0, 2.0, 2.0], [0.5, 0.0, 0.0]).unwrap();
        let seed = [0.4, 0.3, 0.3];
        assert!(find_periodic_orbit(&broken, seed, 1e-8).is_err());
    }

    #[test]
    fn symmetric_orbit_reproduces_exact_period() {
        let exact = PeriodicOrbit::new(0.01).unwrap();
        let seed = exact.point(0.0);
        let orbit = find_periodic_orbit(&GeneralParams::symmetric(), seed, 1e-7).unwrap();
        let rel = (orbit.period() - exact.period()).abs() / exact.period();
        assert!(rel < 1e-5, "T = {} vs {}", orbit.period(), exact.period());
        assert!(orbit.closure_gap() < 1e-7);
        // The interpolant stays on the manifold and conserves the product.
        for i in 0..50 {
            let t = orbit.period() * i as f64 / 50.0;
            let [u, v, w] = orbit.point(t);
            assert!((u + v + w - 1.0).abs() < 1e-7);
            assert!((u * v * w - 0.01).abs() < 1e-5);
        }
    }

    #[test]
    fn symmetric_monodromy_matches_exact_route() {
        let exact = PeriodicOrbit::new(0.01).unwrap();
        let seed = exact.point(0.0);
        let orbit = find_periodic_orbit(&GeneralParams::symmetric(), seed, 1e-7).unwrap();
        let d = Diffusivities::new(1.0, 0.0, 0.0).unwrap();
        for k2 in [0.0, 0.4, 1.1] {
            let general = general_monodromy(&orbit, k2, &d, TOL).unwrap();
            let exact_m = crate::floquet::monodromy(&exact, k2, &d, TOL).unwrap();
            // The two routes section the orbit at different phases, so the
            // matrices are conjugate rather than equal: compare the
            // similarity invariants.
            assert!((general.m.trace() - exact_m.m.trace()).abs() < 1e-6);
            assert!((general.m.det() - exact_m.m.det()).abs() < 1e-6);
            assert!(
                (general.m.second_invariant() - exact_m.m.second_invariant()).abs() < 1e-6
            );
            if k2 > 0.0 {
                // Well-separated multipliers compare directly.
                for i in 0..3 {
                    let diff = cabs(general.multipliers[i] - exact_m.multipliers[i]);
                    assert!(
                        diff < 1e-6,
                        "k2 = {k2}, mu{i}: {} vs {}",
                        general.multipliers[i],
                        exact_m.multipliers[i]
                    );
                }
            }
        }
    }

    #[test]
    fn general_k0_spectrum_has_double_unit_multiplier() {
        // The orbit continuum forces {1, 1, decaying} at k = 0.
        let params = fig10_params();
        let orbit =
            find_periodic_orbit(&params, seed_on_ray(&params, 0.5).unwrap(), 1e-7).unwrap();
        let d = Diffusivities::new(0.0, 0.0, 0.0).unwrap();
        let r = general_monodromy(&orbit, 0.0, &d, TOL).unwrap();
        let jordan_tol = TOL.sqrt() * 100.0;
        assert!(
            cabs(r.multipliers[0] - Complex64::new(1.0, 0.0)) < jordan_tol,
            "mu1 = {}",
            r.multipliers[0]
        );
        assert!(cabs(r.multipliers[1] - Complex64::new(1.0, 0.0)) < jordan_tol);
        assert!(cabs(r.multipliers[2]) < 1.0);
    }

    #[test]
    fn general_abel_identity() {
        let params = fig10_params();
        let orbit =
            find_periodic_orbit(&params, seed_on_ray(&params, 0.4).unwrap(), 1e-7).unwrap();
        let d = Diffusivities::new(0.6, 0.2, 0.1).unwrap();
        for k2 in [0.0, 0.15] {
            let r = general_monodromy(&orbit, k2, &d, TOL).unwrap();
            assert!(
                r.det_rel_err < 1e-5,
                "k2 = {k2}: Abel defect {:.3e}",
                r.det_rel_err
            );
        }
    }

    #[test]
    fn seed_ray_validation() {
        let params = GeneralParams::symmetric();
        assert!(seed_on_ray(&params, 0.0).is_err());
        assert!(seed_on_ray(&params, 1.0).is_err());
        let seed = seed_on_ray(&params, 0.5).unwrap();
        assert!((seed[0] - (1.0 / 3.0 + 0.5 * 2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn period_targeting_on_symmetric_family() {
        let params = GeneralParams::symmetric();
        let orbit = find_orbit_with_period(&params, 14.0, 0.02, 1e-7).unwrap();
        assert!((orbit.period() - 14.0).abs() < 0.02);
        // Cross-check against the exact inverse period map.
        let a = crate::orbit::amplitude_from_period(orbit.period()).unwrap();
        let mean_product: f64 = (0..64)
            .map(|i| {
                let [u, v, w] = orbit.point(orbit.period() * i as f64 / 64.0);
                u * v * w
            })
            .sum::<f64>()
            / 64.0;
        assert!((mean_product - a).abs() < 1e-5, "{mean_product} vs {a}");
    }
}
