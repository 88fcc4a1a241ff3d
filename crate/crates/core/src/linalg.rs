//! Fixed-size real 3x3 linear algebra: just enough for monodromy matrices.
//!
//! Eigenvalues come from the characteristic cubic (trigonometric/Cardano
//! split on the discriminant sign with a dead band for the near-multiple
//! case) followed by a Newton polish in complex arithmetic; eigenvectors
//! from cross products of rows of `M - lambda I`. Every eigenpair carries a
//! certified residual `|M v - lambda v| / |v|`.

use crate::math;
use num_complex::Complex64;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

/// Dead band on the scaled cubic discriminant below which a multiple root is
/// assumed instead of trusting the sign.
pub const DISCRIMINANT_DEAD_BAND: f64 = 1e-12;

/// Row-major real 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn zero() -> Mat3 {
        Mat3([[0.0; 3]; 3])
    }

    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
        Mat3([
            [c0[0], c1[0], c2[0]],
            [c0[1], c1[1], c2[1]],
            [c0[2], c1[2], c2[2]],
        ])
    }

    pub fn column(&self, j: usize) -> Vec3 {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn row(&self, i: usize) -> Vec3 {
        self.0[i]
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul_mat(&self, other: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = self.0;
        for row in &mut out {
            for e in row {
                *e *= s;
            }
        }
        Mat3(out)
    }

    pub fn add(&self, other: &Mat3) -> Mat3 {
        let mut out = self.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += other.0[i][j];
            }
        }
        Mat3(out)
    }

    pub fn sub(&self, other: &Mat3) -> Mat3 {
        let mut out = self.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] -= other.0[i][j];
            }
        }
        Mat3(out)
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the principal 2x2 minors (second invariant).
    pub fn second_invariant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1]
    }

    /// Adjugate (transposed cofactor) matrix, so `M adj(M) = det(M) I`.
    pub fn adjugate(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ])
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        let mut out = 0.0_f64;
        for row in &self.0 {
            for &e in row {
                out = out.max(math::abs(e));
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|r| r.iter().all(|e| e.is_finite()))
    }
}

pub fn vec_add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn vec_sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn vec_scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    math::sqrt(dot(a, a))
}

pub fn cabs(z: Complex64) -> f64 {
    math::hypot(z.re, z.im)
}

pub fn cvec_norm(v: &CVec3) -> f64 {
    math::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

fn cross_c(a: &CVec3, b: &CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// One certified eigenpair.
#[derive(Debug, Clone, Copy)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: CVec3,
    /// `|M v - lambda v|_2 / |v|_2`.
    pub residual: f64,
}

/// Eigenvalues and eigenvectors of a real 3x3 matrix, sorted by descending
/// modulus of the eigenvalue.
pub fn eigen3(m: &Mat3) -> [EigenPair; 3] {
    let values = eigenvalues3(m);
    let mut pairs = values.map(|lambda| {
        let (vector, residual) = eigenvector_for(m, lambda);
        EigenPair {
            value: lambda,
            vector,
            residual,
        }
    });
    pairs.sort_by(|a, b| {
        cabs(b.value)
            .partial_cmp(&cabs(a.value))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    pairs
}

/// Roots of the characteristic polynomial of `m`.
pub fn eigenvalues3(m: &Mat3) -> [Complex64; 3] {
    // p(lambda) = lambda^3 - c2 lambda^2 + c1 lambda - c0
    let c2 = m.trace();
    let c1 = m.second_invariant();
    let c0 = m.det();

    // Depressed cubic x^3 + p x + q with lambda = x + c2/3.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = shift * shift * shift - c2 * shift * shift + c1 * shift - c0;

    let scale = math::abs(p).max(math::abs(q)).max(1e-300);
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let dead = DISCRIMINANT_DEAD_BAND * scale * scale * scale;

    let mut roots = if disc > dead {
        // Three distinct real roots (p < 0 necessarily).
        let r = math::sqrt(-p / 3.0);
        let arg = (3.0 * q / (2.0 * p)) / r;
        let theta = math::acos(arg.clamp(-1.0, 1.0));
        [
            Complex64::new(2.0 * r * math::cos(theta / 3.0), 0.0),
            Complex64::new(
                2.0 * r * math::cos((theta - 2.0 * core::f64::consts::PI) / 3.0),
                0.0,
            ),
            Complex64::new(
                2.0 * r * math::cos((theta - 4.0 * core::f64::consts::PI) / 3.0),
                0.0,
            ),
        ]
    } else if disc < -dead {
        // One real root and a complex pair. Stable Cardano: pick the cube
        // root away from cancellation.
        let half_q = 0.5 * q;
        let rad = math::sqrt(half_q * half_q + p * p * p / 27.0);
        let u = if q >= 0.0 {
            math::cbrt(-half_q - rad)
        } else {
            math::cbrt(-half_q + rad)
        };
        let x1 = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        // Deflate: x^2 + x1 x + (x1^2 + p) = 0 for the remaining pair.
        let b = x1;
        let c = x1 * x1 + p;
        let d = b * b - 4.0 * c;
        let im = math::sqrt(math::abs(d).max(0.0)) / 2.0;
        [
            Complex64::new(x1, 0.0),
            Complex64::new(-b / 2.0, im),
            Complex64::new(-b / 2.0, -im),
        ]
    } else {
        // Near-multiple roots. With x^3 + p x + q ~ (x - a)^2 (x + 2a),
        // a = -3q/(2p) when p != 0, else a = 0 (triple root).
        let a = if math::abs(p) > 1e-300 * scale {
            -3.0 * q / (2.0 * p)
        } else {
            0.0
        };
        [
            Complex64::new(a, 0.0),
            Complex64::new(a, 0.0),
            Complex64::new(-2.0 * a, 0.0),
        ]
    };

    // Undo the shift, then Newton-polish on the original characteristic
    // polynomial in complex arithmetic. Skip polishing where p'(lambda) is
    // tiny (multiple root): Newton would amplify noise there.
    for root in &mut roots {
        let mut lambda = *root + shift;
        for _ in 0..3 {
            let pv = ((lambda - c2) * lambda + c1) * lambda - c0;
            let dv = (3.0 * lambda - 2.0 * c2) * lambda + c1;
            if cabs(dv) < 1e-8 * scale.max(1.0) {
                break;
            }
            let step = pv / dv;
            lambda -= step;
            if cabs(step) < 1e-15 * cabs(lambda).max(1.0) {
                break;
            }
        }
        *root = lambda;
    }

    // A real matrix has eigenvalues closed under conjugation; symmetrize the
    // polished pair to keep that exact.
    if roots[1].im != 0.0 || roots[2].im != 0.0 {
        let pair = (roots[1] + roots[2].conj()) * 0.5;
        roots[1] = pair;
        roots[2] = pair.conj();
    }
    roots
}

/// Eigenvector for a given eigenvalue via cross products of rows of
/// `M - lambda I`; returns the normalized vector and its residual.
pub fn eigenvector_for(m: &Mat3, lambda: Complex64) -> (CVec3, f64) {
    let rows: [CVec3; 3] = core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            let mut z = Complex64::new(m.0[i][j], 0.0);
            if i == j {
                z -= lambda;
            }
            z
        })
    });
    let candidates = [
        cross_c(&rows[0], &rows[1]),
        cross_c(&rows[1], &rows[2]),
        cross_c(&rows[0], &rows[2]),
    ];
    let mut best = candidates[0];
    let mut best_norm = cvec_norm(&best);
    for cand in &candidates[1..] {
        let n = cvec_norm(cand);
        if n > best_norm {
            best = *cand;
            best_norm = n;
        }
    }
    if best_norm == 0.0 {
        // lambda I (or rank deficiency in every pair of rows): any direction.
        best = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        best_norm = 1.0;
    }
    let v: CVec3 = core::array::from_fn(|i| best[i] / best_norm);
    let mut res = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            acc += Complex64::new(m.0[i][j], 0.0) * v[j];
        }
        res[i] = acc - lambda * v[i];
    }
    (v, cvec_norm(&res))
}

/// Solves `A x = b` by the adjugate; caller guards against small `det`.
pub fn solve3(a: &Mat3, b: Vec3) -> Option<Vec3> {
    let det = a.det();
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let adj = a.adjugate();
    Some(vec_scale(adj.mul_vec(b), 1.0 / det))
}
