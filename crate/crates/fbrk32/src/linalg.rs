//! Small dense complex linear algebra: 3x3 matrices, cubic eigensolver,
//! and matrix exponentials sized for amplification-matrix work.

use num_complex::Complex64 as C64;

/// 3x3 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3(pub [[C64; 3]; 3]);

/// Length-3 complex vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3(pub [C64; 3]);

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// i as a complex constant.
pub const I: C64 = C64::new(0.0, 1.0);

impl Mat3 {
    pub fn zeros() -> Self {
        Mat3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..3 {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn from_rows(r0: [C64; 3], r1: [C64; 3], r2: [C64; 3]) -> Self {
        Mat3([r0, r1, r2])
    }

    /// Column `j` as a vector.
    pub fn col(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn set_col(&mut self, j: usize, v: Vec3) {
        for i in 0..3 {
            self.0[i][j] = v.0[i];
        }
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> C64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Sum of the three principal 2x2 minors (second elementary symmetric
    /// function of the eigenvalues).
    pub fn minor_sum(&self) -> C64 {
        let a = &self.0;
        (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            + (a[0][0] * a[2][2] - a[0][2] * a[2][0])
            + (a[0][0] * a[1][1] - a[0][1] * a[1][0])
    }

    pub fn mul(&self, rhs: &Mat3) -> Mat3 {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = ZERO;
                for k in 0..3 {
                    s += self.0[i][k] * rhs.0[k][j];
                }
                out.0[i][j] = s;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let mut out = [ZERO; 3];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row[0] * v.0[0] + row[1] * v.0[1] + row[2] * v.0[2];
        }
        Vec3(out)
    }

    pub fn add(&self, rhs: &Mat3) -> Mat3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Mat3) -> Mat3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Mat3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] *= s;
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat3 {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j].norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Explicit inverse via the adjugate; `None` when the determinant is
    /// negligible relative to the matrix scale.
    pub fn inverse(&self) -> Option<Mat3> {
        let d = self.det();
        let scale = self.frobenius();
        if d.norm() <= 1e-300 || d.norm() < 1e-18 * scale * scale * scale {
            return None;
        }
        let a = &self.0;
        let cof = |i1: usize, i2: usize, j1: usize, j2: usize| {
            a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]
        };
        let mut inv = Mat3::zeros();
        inv.0[0][0] = cof(1, 2, 1, 2);
        inv.0[0][1] = -cof(0, 2, 1, 2);
        inv.0[0][2] = cof(0, 1, 1, 2);
        inv.0[1][0] = -cof(1, 2, 0, 2);
        inv.0[1][1] = cof(0, 2, 0, 2);
        inv.0[1][2] = -cof(0, 1, 0, 2);
        inv.0[2][0] = cof(1, 2, 0, 1);
        inv.0[2][1] = -cof(0, 2, 0, 1);
        inv.0[2][2] = cof(0, 1, 0, 1);
        Some(inv.scale(ONE / d))
    }
}

impl Vec3 {
    pub fn zeros() -> Self {
        Vec3([ZERO; 3])
    }

    pub fn basis(k: usize) -> Self {
        let mut v = Self::zeros();
        v.0[k] = ONE;
        v
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr() + self.0[2].norm_sqr()).sqrt()
    }

    pub fn sub(&self, rhs: &Vec3) -> Vec3 {
        Vec3([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
        ])
    }

    pub fn scale(&self, s: C64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Bilinear (unconjugated) cross product; for a rank-2 matrix the cross
    /// of two independent rows spans the nullspace.
    pub fn cross(&self, rhs: &Vec3) -> Vec3 {
        let a = &self.0;
        let b = &rhs.0;
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }
}

/// Roots of the monic cubic x^3 + c2 x^2 + c1 x + c0 by Cardano's formula,
/// each polished with a few Newton steps on the original polynomial.
pub fn cubic_roots(c2: C64, c1: C64, c0: C64) -> [C64; 3] {
    let third: C64 = C64::new(1.0 / 3.0, 0.0);
    let shift = c2 * third;
    // Depressed form t^3 + p t + q with x = t - c2/3.
    let p = c1 - c2 * c2 * third;
    let q =
        c2 * (C64::new(2.0, 0.0) * c2 * c2 - C64::new(9.0, 0.0) * c1) / C64::new(27.0, 0.0) + c0;
    let half_q = q * C64::new(0.5, 0.0);
    let disc = half_q * half_q + p * p * p / C64::new(27.0, 0.0);
    let s = disc.sqrt();
    // Pick the branch that avoids cancellation in -q/2 +/- s.
    let u3 = if (-half_q + s).norm() >= (-half_q - s).norm() {
        -half_q + s
    } else {
        -half_q - s
    };
    let mut roots = if u3.norm() < 1e-300 && p.norm() < 1e-300 {
        [-shift; 3]
    } else {
        let w = u3.cbrt();
        let omega = C64::new(-0.5, 0.75f64.sqrt());
        let mut out = [ZERO; 3];
        let mut wk = w;
        for r in &mut out {
            *r = wk - p / (C64::new(3.0, 0.0) * wk) - shift;
            wk *= omega;
        }
        out
    };
    for r in &mut roots {
        for _ in 0..3 {
            let x = *r;
            let f = ((x + c2) * x + c1) * x + c0;
            let df = (C64::new(3.0, 0.0) * x + C64::new(2.0, 0.0) * c2) * x + c1;
            if df.norm() < 1e-300 {
                break;
            }
            let step = f / df;
            *r = x - step;
            if step.norm() <= 1e-16 * (1.0 + x.norm()) {
                break;
            }
        }
    }
    roots
}

/// One eigenpair of a 3x3 matrix.
#[derive(Clone, Copy, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: Vec3,
    /// ||A v - lambda v|| with ||v|| = 1.
    pub residual: f64,
}

fn residual_of(a: &Mat3, lambda: C64, v: &Vec3) -> f64 {
    a.mul_vec(v).sub(&v.scale(lambda)).norm()
}

/// Solve (A - mu I) x = b by Gaussian elimination with partial pivoting.
fn solve_shifted(a: &Mat3, mu: C64, b: &Vec3) -> Option<Vec3> {
    let mut m = [[ZERO; 4]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[..3].copy_from_slice(&a.0[i]);
        row[i] -= mu;
        row[3] = b.0[i];
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&r, &s| m[r][col].norm().total_cmp(&m[s][col].norm()))
            .unwrap();
        if m[piv][col].norm() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        let pivot_row = m[col];
        for row in m.iter_mut().skip(col + 1) {
            let factor = row[col] / pivot_row[col];
            for (x, upper) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= factor * upper;
            }
        }
    }
    let mut x = [ZERO; 3];
    for i in (0..3).rev() {
        let mut s = m[i][3];
        for j in (i + 1)..3 {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    let v = Vec3(x);
    if v.0.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(v)
    } else {
        None
    }
}

fn eigenvector_for(a: &Mat3, lambda: C64) -> Vec3 {
    let m = a.sub(&Mat3::identity().scale(lambda));
    let scale = m.frobenius();
    if scale <= 1e-14 * (1.0 + a.frobenius()) {
        // A is (numerically) lambda*I: anything is an eigenvector.
        return Vec3::basis(0);
    }
    let rows = [
        Vec3([m.0[0][0], m.0[0][1], m.0[0][2]]),
        Vec3([m.0[1][0], m.0[1][1], m.0[1][2]]),
        Vec3([m.0[2][0], m.0[2][1], m.0[2][2]]),
    ];
    let mut best = Vec3::zeros();
    let mut best_norm = 0.0;
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let c = rows[i].cross(&rows[j]);
        let n = c.norm();
        if n > best_norm {
            best_norm = n;
            best = c;
        }
    }
    let mut v = if best_norm > 1e-14 * scale * scale {
        best.scale(C64::new(1.0 / best_norm, 0.0))
    } else {
        // Near-defective: fall back to inverse iteration from a fixed start.
        Vec3([
            C64::new(0.577, 0.211),
            C64::new(-0.442, 0.385),
            C64::new(0.301, -0.524),
        ])
    };
    // Inverse-iteration refinement; the slightly shifted solve stays
    // well-posed when lambda is (near-)exact.
    let shift = lambda + C64::new(1e-11 * (1.0 + a.frobenius()), 0.0);
    for _ in 0..4 {
        let n = v.norm();
        if n == 0.0 {
            v = Vec3::basis(0);
            continue;
        }
        let vn = v.scale(C64::new(1.0 / n, 0.0));
        if residual_of(a, lambda, &vn) <= 1e-13 * (1.0 + a.frobenius()) {
            return vn;
        }
        match solve_shifted(a, shift, &vn) {
            Some(next) => v = next,
            None => return vn,
        }
    }
    let n = v.norm();
    if n > 0.0 {
        v.scale(C64::new(1.0 / n, 0.0))
    } else {
        Vec3::basis(0)
    }
}

/// All three eigenpairs of `a` via the characteristic cubic.
pub fn eig3(a: &Mat3) -> [EigenPair; 3] {
    let c2 = -a.trace();
    let c1 = a.minor_sum();
    let c0 = -a.det();
    let roots = cubic_roots(c2, c1, c0);
    let mut out = [EigenPair {
        value: ZERO,
        vector: Vec3::zeros(),
        residual: f64::INFINITY,
    }; 3];
    let near_scalar = a
        .sub(&Mat3::identity().scale(a.trace() / C64::new(3.0, 0.0)))
        .frobenius()
        <= 1e-14 * (1.0 + a.frobenius());
    for (k, &lambda) in roots.iter().enumerate() {
        let vector = if near_scalar {
            Vec3::basis(k)
        } else {
            eigenvector_for(a, lambda)
        };
        out[k] = EigenPair {
            value: lambda,
            vector,
            residual: residual_of(a, lambda, &vector),
        };
    }
    out
}

/// Spectral radius (largest eigenvalue modulus).
pub fn spectral_radius(a: &Mat3) -> f64 {
    eig3(a).iter().map(|p| p.value.norm()).fold(0.0, f64::max)
}

/// Matrix exponential by unitary-style diagonalization, for normal matrices
/// (the skew-Hermitian generators used throughout). Falls back to
/// scaling-and-squaring when the eigenvector basis is ill-conditioned.
pub fn expm(a: &Mat3) -> Mat3 {
    let pairs = eig3(a);
    let mut v = Mat3::zeros();
    for (k, p) in pairs.iter().enumerate() {
        v.set_col(k, p.vector);
    }
    if let Some(vinv) = v.inverse() {
        let cond = v.frobenius() * vinv.frobenius();
        if cond <= 1e6 {
            let mut d = Mat3::zeros();
            for (k, p) in pairs.iter().enumerate() {
                d.0[k][k] = p.value.exp();
            }
            let cand = v.mul(&d).mul(&vinv);
            // Diagonalization must actually reproduce A; otherwise the
            // eigenbasis was unreliable (defective or inaccurate).
            let recon = v
                .mul(&{
                    let mut dl = Mat3::zeros();
                    for (k, p) in pairs.iter().enumerate() {
                        dl.0[k][k] = p.value;
                    }
                    dl
                })
                .mul(&vinv);
            if recon.sub(a).frobenius() <= 1e-10 * (1.0 + a.frobenius()) {
                return cand;
            }
        }
    }
    expm_pade6(a)
}

/// Degree-6 diagonal Pade approximant with scaling and squaring.
pub fn expm_pade6(a: &Mat3) -> Mat3 {
    let norm = a.frobenius();
    let s = if norm > 0.5 {
        ((norm / 0.5).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let b = a.scale(C64::new(0.5f64.powi(s), 0.0));
    // p(x) = sum c_j x^j, e^x ~ p(x)/p(-x) at degree 6.
    let c = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let mut pow = Mat3::identity();
    let mut p = Mat3::identity();
    let mut q = Mat3::identity();
    for (j, &cj) in c.iter().enumerate().skip(1) {
        pow = pow.mul(&b);
        let term = pow.scale(C64::new(cj, 0.0));
        p = p.add(&term);
        if j % 2 == 0 {
            q = q.add(&term);
        } else {
            q = q.sub(&term);
        }
    }
    let mut r = q
        .inverse()
        .expect("Pade denominator is nonsingular for scaled input")
        .mul(&p);
    for _ in 0..s {
        r = r.mul(&r);
    }
    r
}
