//! Direct simulation of the reaction-diffusion system on a periodic 1-D
//! domain, used to verify Floquet-predicted growth and decay rates in the
//! linear regime.
//!
//! Method of lines: second-order central diffusion stencil, classical
//! fixed-step RK4 in time with the step bounded by `0.4 dx^2 / max(D)`.
//! The run starts from a uniform oscillation plus a single-mode cosine
//! disturbance and records the complex amplitude of that mode for each
//! species at strobe times `t = n T`; Floquet theory predicts per-period
//! amplitude ratios `|mu_1|`, with a sign-alternating strobed amplitude in
//! the period-doubling regime.

use crate::error::{CoreError, Result};
use crate::general::NumericOrbit;
use crate::linalg::Vec3;
use crate::math;
use crate::orbit::PeriodicOrbit;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

/// A uniform oscillation a DNS run can be built around: the strobe period,
/// the state at the canonical phase, and the reaction terms of the system
/// it solves.
pub trait UniformOscillation {
    fn period(&self) -> f64;
    fn initial_point(&self) -> Vec3;
    fn reaction(&self, x: Vec3) -> Vec3;
}

impl UniformOscillation for PeriodicOrbit {
    fn period(&self) -> f64 {
        self.period()
    }

    fn initial_point(&self) -> Vec3 {
        self.point(0.0)
    }

    fn reaction(&self, x: Vec3) -> Vec3 {
        let [u, v, w] = x;
        [
            u * (1.0 - u - 2.0 * v),
            v * (1.0 - v - 2.0 * w),
            w * (1.0 - w - 2.0 * u),
        ]
    }
}

impl UniformOscillation for NumericOrbit {
    fn period(&self) -> f64 {
        self.period()
    }

    fn initial_point(&self) -> Vec3 {
        self.point(0.0)
    }

    fn reaction(&self, x: Vec3) -> Vec3 {
        self.params().reaction(x)
    }
}

/// Configuration of one simulation.
#[derive(Debug, Clone)]
pub struct DnsConfig {
    /// Domain length.
    pub l: f64,
    /// Grid points.
    pub n: usize,
    /// Requested time step (shrunk to divide the strobe period exactly).
    pub dt: f64,
    /// Simulation horizon.
    pub t_end: f64,
    /// Disturbance amplitude.
    pub eps0: f64,
    /// Disturbance wavenumber; `k_pert L` must be a multiple of `2 pi`.
    pub k_pert: f64,
    pub d: crate::floquet::Diffusivities,
    /// Seed for the optional initial noise.
    pub seed: u64,
    /// Uniform noise amplitude added to the initial fields (0 disables).
    pub noise_amp: f64,
}

/// Disturbance direction: the species-space unit vector multiplying the
/// cosine mode.
pub const DISTURBANCE_DIRECTION: Vec3 = [1.0, 0.0, 0.0];

impl DnsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0 && self.l.is_finite()) || self.n < 16 {
            return Err(CoreError::domain("need positive L and at least 16 grid points"));
        }
        if !(self.t_end > 0.0 && self.dt > 0.0) {
            return Err(CoreError::domain("need positive dt and t_end"));
        }
        if !(0.0..=1e-4).contains(&self.eps0) {
            return Err(CoreError::domain(
                "eps0 must lie in [0, 1e-4] to stay in the linear regime",
            ));
        }
        let mode = self.k_pert * self.l / (2.0 * core::f64::consts::PI);
        if math::abs(mode - math::round(mode)) > 1e-9 {
            return Err(CoreError::domain(format!(
                "k_pert L / (2 pi) = {mode} must be an integer on a periodic domain"
            )));
        }
        let k_res = core::f64::consts::PI * self.n as f64 / self.l * (2.0 / 3.0);
        if self.k_pert > k_res {
            return Err(CoreError::domain(format!(
                "k_pert = {} above the resolvable limit {k_res:.3}",
                self.k_pert
            )));
        }
        let dmax = self.d.max();
        if dmax > 0.0 {
            let dx = self.l / self.n as f64;
            let dt_cfl = 0.4 * dx * dx / dmax;
            if self.dt > dt_cfl {
                return Err(CoreError::domain(format!(
                    "dt = {} violates the diffusion bound 0.4 dx^2 / max(D) = {dt_cfl:.3e}",
                    self.dt
                )));
            }
        }
        if self.dt > 0.05 {
            return Err(CoreError::domain("dt must not exceed 0.05 reaction units"));
        }
        Ok(())
    }
}

/// One strobe record.
#[derive(Debug, Clone, Copy)]
pub struct Strobe {
    pub t: f64,
    /// Complex amplitude of the disturbed mode per species.
    pub amp: [Complex64; 3],
    /// Spatial means of the three fields.
    pub mean: Vec3,
}

/// Simulation output: per-period strobes.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub strobes: Vec<Strobe>,
    /// Number of time steps per period actually used.
    pub steps_per_period: usize,
    pub dt: f64,
}

struct Fields {
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

impl Fields {
    fn zeros(n: usize) -> Self {
        Self {
            u: vec![0.0; n],
            v: vec![0.0; n],
            w: vec![0.0; n],
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn uniform_pm1(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
}

/// Runs the simulation and strobes the disturbed mode once per period.
pub fn simulate<O: UniformOscillation>(orbit: &O, cfg: &DnsConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let n = cfg.n;
    let t_period = orbit.period();
    let steps_per_period = math::ceil(t_period / cfg.dt) as usize;
    let dt = t_period / steps_per_period as f64;
    let dx = cfg.l / n as f64;
    let inv_dx2 = 1.0 / (dx * dx);
    let n_periods = math::floor(cfg.t_end / t_period) as usize;
    if n_periods == 0 {
        return Err(CoreError::domain("t_end shorter than one strobe period"));
    }

    // Initial condition: uniform orbit point plus the cosine mode (plus
    // optional seeded noise).
    let x0 = orbit.initial_point();
    let mut state = Fields::zeros(n);
    let mut rng = cfg.seed;
    for j in 0..n {
        let x = j as f64 * dx;
        let bump = cfg.eps0 * math::cos(cfg.k_pert * x);
        state.u[j] = x0[0] + bump * DISTURBANCE_DIRECTION[0];
        state.v[j] = x0[1] + bump * DISTURBANCE_DIRECTION[1];
        state.w[j] = x0[2] + bump * DISTURBANCE_DIRECTION[2];
        if cfg.noise_amp > 0.0 {
            state.u[j] += cfg.noise_amp * uniform_pm1(&mut rng);
            state.v[j] += cfg.noise_amp * uniform_pm1(&mut rng);
            state.w[j] += cfg.noise_amp * uniform_pm1(&mut rng);
        }
    }

    let mut k1 = Fields::zeros(n);
    let mut k2 = Fields::zeros(n);
    let mut k3 = Fields::zeros(n);
    let mut k4 = Fields::zeros(n);
    let mut tmp = Fields::zeros(n);

    let rhs = |f: &Fields, out: &mut Fields| {
        for j in 0..n {
            let jm = if j == 0 { n - 1 } else { j - 1 };
            let jp = if j + 1 == n { 0 } else { j + 1 };
            let lap_u = (f.u[jm] - 2.0 * f.u[j] + f.u[jp]) * inv_dx2;
            let lap_v = (f.v[jm] - 2.0 * f.v[j] + f.v[jp]) * inv_dx2;
            let lap_w = (f.w[jm] - 2.0 * f.w[j] + f.w[jp]) * inv_dx2;
            let r = orbit.reaction([f.u[j], f.v[j], f.w[j]]);
            out.u[j] = r[0] + cfg.d.du * lap_u;
            out.v[j] = r[1] + cfg.d.dv * lap_v;
            out.w[j] = r[2] + cfg.d.dw * lap_w;
        }
    };

    let mode_amp = |f: &Fields| -> Strobe {
        let mut amp = [Complex64::new(0.0, 0.0); 3];
        let mut mean = [0.0; 3];
        for j in 0..n {
            let x = j as f64 * dx;
            let ph = Complex64::new(
                math::cos(cfg.k_pert * x),
                -math::sin(cfg.k_pert * x),
            );
            amp[0] += f.u[j] * ph;
            amp[1] += f.v[j] * ph;
            amp[2] += f.w[j] * ph;
            mean[0] += f.u[j];
            mean[1] += f.v[j];
            mean[2] += f.w[j];
        }
        let norm = if cfg.k_pert == 0.0 { 1.0 } else { 2.0 };
        for a in &mut amp {
            *a *= norm / n as f64;
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        Strobe {
            t: 0.0,
            amp,
            mean,
        }
    };

    let mut strobes = Vec::with_capacity(n_periods + 1);
    let mut s0 = mode_amp(&state);
    s0.t = 0.0;
    strobes.push(s0);

    let mut t = 0.0;
    for _period in 0..n_periods {
        for _ in 0..steps_per_period {
            // Classical RK4.
            rhs(&state, &mut k1);
            axpy(&state, &k1, 0.5 * dt, &mut tmp);
            rhs(&tmp, &mut k2);
            axpy(&state, &k2, 0.5 * dt, &mut tmp);
            rhs(&tmp, &mut k3);
            axpy(&state, &k3, dt, &mut tmp);
            rhs(&tmp, &mut k4);
            for j in 0..n {
                state.u[j] += dt / 6.0 * (k1.u[j] + 2.0 * k2.u[j] + 2.0 * k3.u[j] + k4.u[j]);
                state.v[j] += dt / 6.0 * (k1.v[j] + 2.0 * k2.v[j] + 2.0 * k3.v[j] + k4.v[j]);
                state.w[j] += dt / 6.0 * (k1.w[j] + 2.0 * k2.w[j] + 2.0 * k3.w[j] + k4.w[j]);
            }
            t += dt;
        }
        // Concentration sanity at each strobe.
        let min = state
            .u
            .iter()
            .chain(state.v.iter())
            .chain(state.w.iter())
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(CoreError::convergence(format!(
                "negative concentration {min:.3e} at t = {t:.3}: scheme failure or \
                 nonlinearity breach"
            )));
        }
        let mut s = mode_amp(&state);
        s.t = t;
        strobes.push(s);
    }
    Ok(SimOutput {
        strobes,
        steps_per_period,
        dt,
    })
}

fn axpy(base: &Fields, k: &Fields, h: f64, out: &mut Fields) {
    for j in 0..base.u.len() {
        out.u[j] = base.u[j] + h * k.u[j];
        out.v[j] = base.v[j] + h * k.v[j];
        out.w[j] = base.w[j] + h * k.w[j];
    }
}

/// Measured per-period growth of a strobed mode.
#[derive(Debug, Clone, Copy)]
pub struct GrowthRate {
    /// Geometric amplitude ratio per period.
    pub ratio_per_period: f64,
    /// Whether consecutive strobed amplitudes alternate sign (the
    /// period-doubling signature).
    pub sign_flip: bool,
    /// Number of strobes used in the fit.
    pub n_used: usize,
}

/// Amplitude ceiling that defines the linear regime.
pub const LINEAR_REGIME_CEILING: f64 = 1e-2;

/// Least-squares fit of log-amplitude against the period count over the
/// strobes that remain in the linear regime.
pub fn growth_rate(strobes: &[Strobe]) -> Result<GrowthRate> {
    let total = |s: &Strobe| -> f64 {
        math::sqrt(s.amp.iter().map(|a| a.norm_sqr()).sum::<f64>())
    };
    let kept: Vec<(usize, &Strobe)> = strobes
        .iter()
        .enumerate()
        .take_while(|(_, s)| total(s) < LINEAR_REGIME_CEILING)
        .collect();
    if kept.len() < 5 {
        return Err(CoreError::domain(format!(
            "need at least 5 linear-regime strobes, have {} (amplitudes may have left \
             the linear regime)",
            kept.len()
        )));
    }
    if kept.iter().any(|(_, s)| total(s) == 0.0) {
        return Err(CoreError::domain("zero amplitude strobe; nothing to fit"));
    }
    // Linear fit ln(total) = b0 + slope n.
    let n_used = kept.len();
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(i, s) in &kept {
        let x = i as f64;
        let y = math::ln(total(s));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let nf = n_used as f64;
    let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);

    // Sign alternation of the dominant species' real strobed amplitude.
    let dominant = {
        let last = kept.last().unwrap().1;
        let mut best = 0;
        for i in 1..3 {
            if last.amp[i].norm_sqr() > last.amp[best].norm_sqr() {
                best = i;
            }
        }
        best
    };
    let mut alternations = 0usize;
    let mut pairs = 0usize;
    for win in kept.windows(2) {
        let a = win[0].1.amp[dominant].re;
        let b = win[1].1.amp[dominant].re;
        if a != 0.0 && b != 0.0 {
            pairs += 1;
            if a * b < 0.0 {
                alternations += 1;
            }
        }
    }
    let sign_flip = pairs > 0 && alternations * 10 >= pairs * 9;
    Ok(GrowthRate {
        ratio_per_period: math::exp(slope),
        sign_flip,
        n_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{monodromy, Diffusivities};
    use crate::linalg::cabs;

    fn d(du: f64, dv: f64, dw: f64) -> Diffusivities {
        Diffusivities::new(du, dv, dw).unwrap()
    }

    fn synthetic_strobes(ratio: f64, alternating: bool, n: usize) -> Vec<Strobe> {
        let mut out = Vec::new();
        let mut amp = 1e-6;
        let mut sign = 1.0;
        for i in 0..n {
            out.push(Strobe {
                t: i as f64,
                amp: [
                    Complex64::new(sign * amp, 0.0),
                    Complex64::new(0.3 * sign * amp, 0.0),
                    Complex64::new(0.2 * sign * amp, 0.0),
                ],
                mean: [1.0 / 3.0; 3],
            });
            amp *= ratio;
            if alternating {
                sign = -sign;
            }
        }
        out
    }

    #[test]
    fn growth_rate_recovers_exact_geometric_series() {
        let g = growth_rate(&synthetic_strobes(1.23, false, 12)).unwrap();
        assert!((g.ratio_per_period - 1.23).abs() < 1e-12);
        assert!(!g.sign_flip);
        let g = growth_rate(&synthetic_strobes(0.8, true, 12)).unwrap();
        assert!((g.ratio_per_period - 0.8).abs() < 1e-12);
        assert!(g.sign_flip);
    }

    #[test]
    fn growth_rate_rejects_nonlinear_series() {
        // All strobes above the linearity ceiling.
        let mut strobes = synthetic_strobes(1.1, false, 10);
        for s in &mut strobes {
            for a in &mut s.amp {
                *a *= 1e5;
            }
        }
        assert!(growth_rate(&strobes).is_err());
    }

    #[test]
    fn config_validation() {
        let orbit = crate::orbit::PeriodicOrbit::new(0.01).unwrap();
        let t = orbit.period();
        let base = DnsConfig {
            l: 8.0,
            n: 64,
            dt: 1e-3,
            t_end: 3.0 * t,
            eps0: 1e-5,
            k_pert: 2.0 * core::f64::consts::PI / 8.0,
            d: d(1.0, 0.0, 0.0),
            seed: 1,
            noise_amp: 0.0,
        };
        assert!(base.validate().is_ok());
        let mut bad = base.clone();
        bad.k_pert *= 1.1; // no longer commensurate
        assert!(bad.validate().is_err());
        let mut bad = base.clone();
        bad.eps0 = 1e-3;
        assert!(bad.validate().is_err());
        let mut bad = base.clone();
        bad.dt = 0.03; // violates dx^2 bound
        assert!(bad.validate().is_err());
    }

    #[test]
    fn unperturbed_run_follows_the_uniform_orbit() {
        let orbit = crate::orbit::PeriodicOrbit::new(0.02).unwrap();
        let t = orbit.period();
        let cfg = DnsConfig {
            l: 6.0,
            n: 32,
            dt: 2e-3,
            t_end: 1.5 * t,
            eps0: 0.0,
            k_pert: 0.0,
            d: d(0.3, 0.3, 0.3),
            seed: 0,
            noise_amp: 0.0,
        };
        let out = simulate(&orbit, &cfg).unwrap();
        let last = out.strobes.last().unwrap();
        let want = orbit.point(last.t);
        for i in 0..3 {
            assert!(
                (last.mean[i] - want[i]).abs() < 1e-6,
                "component {i}: {} vs {}",
                last.mean[i],
                want[i]
            );
        }
    }

    #[test]
    fn uniform_off_manifold_sum_decays_like_exp_minus_t() {
        // k_pert = 0 with equal diffusion: the disturbance shifts the total
        // off the invariant plane; the sum relaxes to 1 as e^{-t}.
        let orbit = crate::orbit::PeriodicOrbit::new(0.02).unwrap();
        let t = orbit.period();
        let cfg = DnsConfig {
            l: 6.0,
            n: 32,
            dt: 2e-3,
            t_end: 2.5 * t,
            eps0: 1e-5,
            k_pert: 0.0,
            d: d(0.5, 0.5, 0.5),
            seed: 0,
            noise_amp: 0.0,
        };
        let out = simulate(&orbit, &cfg).unwrap();
        for s in &out.strobes {
            let dev = s.mean[0] + s.mean[1] + s.mean[2] - 1.0;
            let want = 1e-5 * (-s.t).exp();
            assert!(
                (dev - want).abs() < 1e-3 * 1e-5 + 1e-12,
                "t = {}: sum deviation {dev:.3e} vs {want:.3e}",
                s.t
            );
        }
    }

    #[test]
    fn stable_case_matches_floquet_decay_rate() {
        // T = 16.70, D = (1,0,0), k^2 = 0.6: the strobed ratio equals
        // |mu_1| within 5%. (k^2 sits in the real-multiplier window; inside
        // the complex-pair window the strobed amplitude beats against the
        // pair rotation and a per-period ratio is not well defined over a
        // short run.)
        let orbit = crate::orbit::PeriodicOrbit::from_period(16.70).unwrap();
        let k2: f64 = 0.6;
        let k = k2.sqrt();
        let l = 2.0 * core::f64::consts::PI / k;
        let n = 96;
        let dx = l / n as f64;
        let cfg = DnsConfig {
            l,
            n,
            dt: (0.35 * dx * dx).min(0.01),
            t_end: 6.2 * orbit.period(),
            eps0: 1e-6,
            k_pert: k,
            d: d(1.0, 0.0, 0.0),
            seed: 0,
            noise_amp: 0.0,
        };
        let out = simulate(&orbit, &cfg).unwrap();
        // Drop the first strobes (mixed-mode transient).
        let g = growth_rate(&out.strobes[2..]).unwrap();
        let mu = cabs(
            monodromy(&orbit, k2, &cfg.d, 1e-10).unwrap().multipliers[0],
        );
        assert!(mu < 1.0);
        assert!(
            (g.ratio_per_period - mu).abs() < 0.05 * mu,
            "DNS ratio {} vs |mu1| {mu}",
            g.ratio_per_period
        );
    }
}
