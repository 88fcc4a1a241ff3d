//! Closed-form small-amplitude expansions, used as an independent analytic
//! oracle for the orbit shape, the frequency, the secular constant, the
//! Fourier table, and the splitting coefficient.
//!
//! Near the coexistence point the orbit is
//!
//! ```text
//! u0(t) = 1/3 + a C + a C^-1 + a^2 C^2 + a^2 C^-2 + O(a^3),   C = e^{i w(a) t},
//! w(a)  = w0 + w2 a^2,  w0 = sqrt(3)/3,  w2 = -2 sqrt(3),
//! ```
//!
//! with `v0`, `w0` the same series rotated by the cube roots of unity, the
//! amplitude fixed real (`u` maximal at `t = 0`), and `a^2 = 1/27 - A`.
//!
//! The fundamental-solution columns and their `F_jk` products are built
//! here by explicit series arithmetic (harmonics of `C` with coefficients
//! linear in `a`) from the column expansions; nothing downstream is
//! hand-transcribed. Two internal consistency checks pin the series: the
//! determinant of the periodic matrix must be time-independent through
//! `O(a)`, and the splitting series evaluated on the table must reproduce
//! `r = -a^2/2`.

use crate::error::{CoreError, Result};
use crate::linalg::Vec3;
use crate::math;
use alloc::format;
use num_complex::Complex64;

/// Base rotation frequency `sqrt(3)/3` at the coexistence point.
pub const OMEGA0: f64 = 0.577_350_269_189_625_8;
/// Quadratic frequency shift `-2 sqrt(3)`.
pub const OMEGA2: f64 = -3.464_101_615_137_754_4;

/// Validity ceiling for the expansions.
pub const MAX_AMPLITUDE: f64 = 0.05;

fn check_amp(a: f64) -> Result<()> {
    if !(a.is_finite() && math::abs(a) <= MAX_AMPLITUDE) {
        return Err(CoreError::domain(format!(
            "small-amplitude expansion invalid at |a| = {} (limit {MAX_AMPLITUDE})",
            math::abs(a)
        )));
    }
    Ok(())
}

/// Oscillation frequency `w0 + w2 a^2`.
pub fn frequency(a: f64) -> f64 {
    OMEGA0 + OMEGA2 * a * a
}

/// Secular constant of the second fundamental solution in the
/// closed-form normalization: `c = 2 w2 a^2 = -4 sqrt(3) a^2`.
pub fn small_c(a: f64) -> f64 {
    2.0 * OMEGA2 * a * a
}

/// Orbit point through second harmonics, amplitude real (`u` maximal at
/// `t = 0`).
pub fn small_orbit(a: f64, t: f64) -> Result<Vec3> {
    check_amp(a)?;
    let th = frequency(a) * t;
    let third = 2.0 * core::f64::consts::PI / 3.0;
    let one = 1.0 / 3.0;
    // Harmonic-1 coefficients are rotated by e^{-i 2pi/3} for v and
    // e^{+i 2pi/3} for w; harmonic-2 coefficients rotate the opposite way.
    let u = one + 2.0 * a * math::cos(th) + 2.0 * a * a * math::cos(2.0 * th);
    let v = one + 2.0 * a * math::cos(th - third) + 2.0 * a * a * math::cos(2.0 * th + third);
    let w = one + 2.0 * a * math::cos(th + third) + 2.0 * a * a * math::cos(2.0 * th - third);
    Ok([u, v, w])
}

/// Splitting coefficient `r = -a^2/2`.
pub fn small_r(a: f64) -> Result<f64> {
    check_amp(a)?;
    Ok(-0.5 * a * a)
}

/// Stability parameter `alpha = 18 r = -9 a^2`.
pub fn small_alpha(a: f64) -> Result<f64> {
    check_amp(a)?;
    Ok(-9.0 * a * a)
}

// --- harmonic series with coefficients linear in a ---------------------

/// Highest harmonic kept in intermediate products.
const H: usize = 4;
const W: usize = 2 * H + 1;

/// Series `sum_{o<=1, |n|<=H} c[o][n] a^o C^n`, truncated at `O(a^2)`.
#[derive(Clone, Copy)]
struct HSeries {
    c: [[Complex64; W]; 2],
}

const ZERO_C: Complex64 = Complex64::new(0.0, 0.0);

impl HSeries {
    fn zero() -> Self {
        Self {
            c: [[ZERO_C; W]; 2],
        }
    }

    fn term(order: usize, n: i32, z: Complex64) -> Self {
        let mut s = Self::zero();
        s.c[order][(n + H as i32) as usize] = z;
        s
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for o in 0..2 {
            for i in 0..W {
                out.c[o][i] += other.c[o][i];
            }
        }
        out
    }

    fn neg(&self) -> Self {
        let mut out = *self;
        for o in 0..2 {
            for i in 0..W {
                out.c[o][i] = -out.c[o][i];
            }
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for o1 in 0..2 {
            for o2 in 0..2 - o1 {
                for i1 in 0..W {
                    if self.c[o1][i1] == ZERO_C {
                        continue;
                    }
                    for i2 in 0..W {
                        if other.c[o2][i2] == ZERO_C {
                            continue;
                        }
                        let n = i1 as i32 + i2 as i32 - 2 * H as i32;
                        if n.unsigned_abs() as usize <= H {
                            out.c[o1 + o2][(n + H as i32) as usize] +=
                                self.c[o1][i1] * other.c[o2][i2];
                        }
                    }
                }
            }
        }
        out
    }

    fn coeff(&self, order: usize, n: i32) -> Complex64 {
        self.c[order][(n + H as i32) as usize]
    }

    fn eval(&self, a: f64, n: i32) -> Complex64 {
        self.coeff(0, n) + self.coeff(1, n) * a
    }
}

/// Row-1 entries of the periodic matrix in the closed-form normalization
/// (column 1 divided by `w0 a`, column 2 the amplitude derivative, column 3
/// the decaying direction), as harmonic series.
fn p_row1() -> [HSeries; 3] {
    let i = Complex64::new(0.0, 1.0);
    let s3 = Complex64::new(math::sqrt(3.0), 0.0);
    // P11: i C - i C^-1 + 2 i a C^2 - 2 i a C^-2.
    let p11 = HSeries::term(0, 1, i)
        .add(&HSeries::term(0, -1, -i))
        .add(&HSeries::term(1, 2, 2.0 * i))
        .add(&HSeries::term(1, -2, -2.0 * i));
    // P12: C + C^-1 + 2 a C^2 + 2 a C^-2.
    let one = Complex64::new(1.0, 0.0);
    let p12 = HSeries::term(0, 1, one)
        .add(&HSeries::term(0, -1, one))
        .add(&HSeries::term(1, 2, 2.0 * one))
        .add(&HSeries::term(1, -2, 2.0 * one));
    // P13: 1 + (3 - i sqrt 3) a C + (3 + i sqrt 3) a C^-1.
    let p13 = HSeries::term(0, 0, one)
        .add(&HSeries::term(1, 1, 3.0 * one - i * s3))
        .add(&HSeries::term(1, -1, 3.0 * one + i * s3));
    [p11, p12, p13]
}

/// The full periodic matrix: rows 2 and 3 are the row-1 series with each
/// harmonic rotated by the cyclic shift `t -> t -+ T/3`.
fn p_matrix() -> [[HSeries; 3]; 3] {
    let row1 = p_row1();
    let rotate = |s: &HSeries, sign: f64| {
        let mut out = HSeries::zero();
        for o in 0..2 {
            for idx in 0..W {
                let n = idx as i32 - H as i32;
                let ang = sign * 2.0 * core::f64::consts::PI * n as f64 / 3.0;
                out.c[o][idx] = s.c[o][idx] * Complex64::new(math::cos(ang), math::sin(ang));
            }
        }
        out
    };
    // Row 2 samples at t - T/3 (harmonic factor e^{-2 pi i n/3}), row 3 at
    // t + T/3.
    [
        row1,
        [
            rotate(&row1[0], -1.0),
            rotate(&row1[1], -1.0),
            rotate(&row1[2], -1.0),
        ],
        [
            rotate(&row1[0], 1.0),
            rotate(&row1[1], 1.0),
            rotate(&row1[2], 1.0),
        ],
    ]
}

/// First column of the inverse and the determinant, as series.
fn p_inverse_column1() -> ([HSeries; 3], HSeries) {
    let p = p_matrix();
    let minor = |r1: usize, c1: usize, r2: usize, c2: usize| {
        p[r1][c1].mul(&p[r2][c2]).add(&p[r1][c2].mul(&p[r2][c1]).neg())
    };
    // Column 1 of adj(P): signed cofactors of the first column.
    let adj = [
        minor(1, 1, 2, 2),
        minor(1, 0, 2, 2).neg(),
        minor(1, 0, 2, 1),
    ];
    let det = p[0][0]
        .mul(&minor(1, 1, 2, 2))
        .add(&p[0][1].mul(&minor(1, 0, 2, 2)).neg())
        .add(&p[0][2].mul(&minor(1, 0, 2, 1)));
    // Invert the determinant as a series: det = d0 (1 + a e(t)/d0) with d0
    // the constant part (det P is time-independent, enforced by a test).
    let d0 = det.coeff(0, 0);
    let mut inv_det = HSeries::term(0, 0, Complex64::new(1.0, 0.0) / d0);
    for idx in 0..W {
        let n = idx as i32 - H as i32;
        let e1 = det.coeff(1, n);
        inv_det.c[1][idx] = -e1 / (d0 * d0);
    }
    let col = [
        adj[0].mul(&inv_det),
        adj[1].mul(&inv_det),
        adj[2].mul(&inv_det),
    ];
    (col, det)
}

/// Fourier coefficients of the nine `F_jk`, harmonics `-2..=2`.
#[derive(Debug, Clone)]
pub struct SmallFTable {
    coeffs: [[[Complex64; 5]; 3]; 3],
    pub a: f64,
}

impl SmallFTable {
    /// Harmonic `n` in `-2..=2` of `F_{jk}` (0-based indices).
    pub fn coeff(&self, j: usize, k: usize, n: i32) -> Complex64 {
        self.coeffs[j][k][(n + 2) as usize]
    }
}

/// `F_jk` tables in the closed-form gauge (real amplitude, `u` maximal at
/// `t = 0`, columns in the closed-form normalization: the tangent divided
/// by `w0 a`, the amplitude derivative, and the decaying direction with
/// unit constant term).
pub fn small_f_coefficients(a: f64) -> Result<SmallFTable> {
    check_amp(a)?;
    let p = p_matrix();
    let (pinv_col1, _) = p_inverse_column1();
    let mut coeffs = [[[ZERO_C; 5]; 3]; 3];
    for (j, pinv_j1) in pinv_col1.iter().enumerate() {
        for k in 0..3 {
            let f = pinv_j1.mul(&p[0][k]);
            for n in -2..=2 {
                coeffs[j][k][(n + 2) as usize] = f.eval(a, n);
            }
        }
    }
    Ok(SmallFTable { coeffs, a })
}

/// `F_jk` tables transformed to the numeric decomposition's gauge, for
/// direct comparison with the Fourier table of `floquet_decompose`.
///
/// The numeric convention phases the orbit at the `u`-minimum (amplitude
/// parameter `b = -a` in the closed forms) and scales the columns as
/// (raw tangent, norm-matched second vector pointing toward larger orbits,
/// sum-normalized decaying vector), i.e. column scalings
///
/// ```text
/// s1 = -w0 a,   s2 = -w0 a (1 + 4a),   s3 = 1/3,
/// ```
///
/// relative to the closed-form columns at `b`; `F_jk` then transforms by
/// `s_k / s_j`.
pub fn small_f_numeric_gauge(a: f64) -> Result<SmallFTable> {
    check_amp(a)?;
    let b = -a;
    let base = small_f_coefficients_at(b)?;
    let nu = OMEGA0 * a;
    let s = [-nu, -nu * (1.0 + 4.0 * a), 1.0 / 3.0];
    let mut coeffs = [[[ZERO_C; 5]; 3]; 3];
    for (j, row) in coeffs.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            let factor = s[k] / s[j];
            for n in 0..5 {
                cell[n] = base.coeffs[j][k][n] * factor;
            }
        }
    }
    Ok(SmallFTable { coeffs, a })
}

/// As [`small_f_coefficients`] without the amplitude-range check (the
/// numeric-gauge path evaluates at `b = -a`).
fn small_f_coefficients_at(b: f64) -> Result<SmallFTable> {
    let p = p_matrix();
    let (pinv_col1, _) = p_inverse_column1();
    let mut coeffs = [[[ZERO_C; 5]; 3]; 3];
    for (j, pinv_j1) in pinv_col1.iter().enumerate() {
        for k in 0..3 {
            let f = pinv_j1.mul(&p[0][k]);
            for n in -2..=2 {
                coeffs[j][k][(n + 2) as usize] = f.eval(b, n);
            }
        }
    }
    Ok(SmallFTable { coeffs, a: b })
}

/// Phase lag that aligns the closed-form orbit onto a numerically phased
/// `u`-series, by maximizing the cross-correlation of the `u` components
/// over one period.
pub fn align_phase(u_numeric: &[f64], t_grid: &[f64], a: f64) -> Result<f64> {
    check_amp(a)?;
    if u_numeric.len() != t_grid.len() || u_numeric.len() < 8 {
        return Err(CoreError::domain("need matching grids of at least 8 samples"));
    }
    let t_period = 2.0 * core::f64::consts::PI / frequency(a);
    let n_tau = 720;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..n_tau {
        let tau = t_period * i as f64 / n_tau as f64;
        let mut corr = 0.0;
        for (&u, &t) in u_numeric.iter().zip(t_grid) {
            corr += (u - 1.0 / 3.0) * (small_orbit(a, t - tau)?[0] - 1.0 / 3.0);
        }
        if corr > best.1 {
            best = (tau, corr);
        }
    }
    // Golden-section polish around the grid optimum.
    let golden = 0.5 * (3.0 - math::sqrt(5.0));
    let (mut lo, mut hi) = (
        best.0 - t_period / n_tau as f64,
        best.0 + t_period / n_tau as f64,
    );
    let corr_at = |tau: f64| -> Result<f64> {
        let mut corr = 0.0;
        for (&u, &t) in u_numeric.iter().zip(t_grid) {
            corr += (u - 1.0 / 3.0) * (small_orbit(a, t - tau)?[0] - 1.0 / 3.0);
        }
        Ok(corr)
    };
    let mut x1 = lo + golden * (hi - lo);
    let mut x2 = hi - golden * (hi - lo);
    let mut f1 = corr_at(x1)?;
    let mut f2 = corr_at(x2)?;
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - golden * (hi - lo);
            f2 = corr_at(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + golden * (hi - lo);
            f1 = corr_at(x1)?;
        }
    }
    Ok(0.5 * (lo + hi))
}
