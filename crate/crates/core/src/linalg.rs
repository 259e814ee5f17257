//! Fixed-size complex matrices and compensated summation.
//!
//! Everything here is small and `Copy`; the walk engine touches one 2×2
//! matrix per site per step, so heap-allocated linear algebra would dominate
//! the run time.

use std::ops::{Add, Mul, Neg, Sub};

pub use num_complex::Complex64 as C64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn scalar(s: C64) -> Self {
        Mat2([[s, ZERO], [ZERO, s]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn pauli_x() -> Self {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Mat2::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Mat2::new(ONE, ZERO, ZERO, -ONE)
    }

    /// `m0·I + mx·σx + my·σy + mz·σz`
    pub fn hermitian(m0: f64, mx: f64, my: f64, mz: f64) -> Self {
        Mat2::new(
            C64::new(m0 + mz, 0.0),
            C64::new(mx, -my),
            C64::new(mx, my),
            C64::new(m0 - mz, 0.0),
        )
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    /// Inverse, or `None` when `|det|` is below `tol` relative to the squared
    /// max-entry scale.
    pub fn inverse(&self, tol: f64) -> Option<Self> {
        let d = self.det();
        let scale = self.max_abs().powi(2);
        if !(d.norm() > tol * scale) {
            return None;
        }
        let m = &self.0;
        let inv = d.inv();
        Some(Mat2::new(
            m[1][1] * inv,
            -m[0][1] * inv,
            -m[1][0] * inv,
            m[0][0] * inv,
        ))
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry distance `‖self − other‖_max`.
    pub fn dist(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// `‖U·U† − I‖_max`
    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.adjoint()).dist(&Mat2::identity())
    }

    /// Eigen-decomposition of a Hermitian matrix: eigenvalues in ascending
    /// order and the matching unit eigenvectors. Only the upper triangle is read.
    pub fn hermitian_eigen(&self) -> ([f64; 2], [[C64; 2]; 2]) {
        let p = self.0[0][0].re;
        let r = self.0[1][1].re;
        let q = self.0[0][1];
        let mean = 0.5 * (p + r);
        let rad = (0.5 * (p - r)).hypot(q.norm());
        let vals = [mean - rad, mean + rad];
        if rad == 0.0 {
            return (vals, [[ONE, ZERO], [ZERO, ONE]]);
        }
        let vec = |lam: f64| {
            // Two candidate null vectors of H − λI; keep the better conditioned.
            let a = [q, C64::new(lam - p, 0.0)];
            let b = [C64::new(lam - r, 0.0), q.conj()];
            let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
            let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
            let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
            [v[0] / n, v[1] / n]
        };
        (vals, [vec(vals[0]), vec(vals[1])])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

/// Dense 4×4 complex matrix, row-major. Used by the (2+1)-D solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C64; 4]; 4]);

impl Mat4 {
    pub const fn zero() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Mat4::zero();
        for i in 0..4 {
            m.0[i][i] = ONE;
        }
        m
    }

    /// Kronecker product `a ⊗ b`; the first factor indexes the outer 2×2 blocks.
    pub fn kron(a: &Mat2, b: &Mat2) -> Self {
        let mut m = Mat4::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                    }
                }
            }
        }
        m
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Self {
        let mut m = Mat4::zero();
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                m.0[r][c] = C64::new(x, 0.0);
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Mat4::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = self.0[c][r].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    #[inline]
    pub fn apply(&self, v: [C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.0[r];
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        out
    }

    /// `v† · self · v`
    pub fn expectation(&self, v: &[C64; 4]) -> C64 {
        let w = self.apply(*v);
        v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &Mat4) -> f64 {
        (*self - *other).max_abs()
    }

    /// Solve `self · X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Mat4) -> Option<Mat4> {
        let mut a = self.0;
        let mut b = rhs.0;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .unwrap();
            if a[pivot][col].norm() < 1e-300 {
                return None;
            }
            a.swap(col, pivot);
            b.swap(col, pivot);
            let inv = a[col][col].inv();
            for row in 0..4 {
                if row == col {
                    continue;
                }
                let f = a[row][col] * inv;
                if f == ZERO {
                    continue;
                }
                for k in 0..4 {
                    let t = a[col][k];
                    a[row][k] -= f * t;
                    let t = b[col][k];
                    b[row][k] -= f * t;
                }
            }
        }
        for row in 0..4 {
            let inv = a[row][row].inv();
            for k in 0..4 {
                b[row][k] *= inv;
            }
        }
        Some(Mat4(b))
    }

    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.adjoint()).dist(&Mat4::identity())
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, o: Mat4) -> Mat4 {
        let mut m = Mat4::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = (0..4).map(|k| self.0[r][k] * o.0[k][c]).sum();
            }
        }
        m
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, o: Mat4) -> Mat4 {
        let mut m = self;
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] += o.0[r][c];
            }
        }
        m
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, o: Mat4) -> Mat4 {
        let mut m = self;
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] -= o.0[r][c];
            }
        }
        m
    }
}

/// Cayley transform `(I + i·h·H)⁻¹ (I − i·h·H)`; unitary for Hermitian `H`.
pub fn cayley4(h: f64, ham: &Mat4) -> Mat4 {
    let ih = ham.scale(C64::new(0.0, h));
    let lhs = Mat4::identity() + ih;
    let rhs = Mat4::identity() - ih;
    // I + iH is never singular for Hermitian H.
    lhs.solve(&rhs).expect("I + i·h·H is invertible for Hermitian H")
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bp = s - a;
    let err = (a - (s - bp)) + (b - bp);
    (s, err)
}

const LEAF: usize = 64;

fn pairwise(values: &[f64]) -> (f64, f64) {
    if values.len() <= LEAF {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for &v in values {
            let (s, e) = two_sum(sum, v);
            sum = s;
            comp += e;
        }
        return (sum, comp);
    }
    let mid = values.len() / 2;
    let (ls, lc) = pairwise(&values[..mid]);
    let (rs, rc) = pairwise(&values[mid..]);
    let (s, e) = two_sum(ls, rs);
    (s, lc + rc + e)
}

/// Compensated pairwise sum over a fixed binary tree.
///
/// The tree shape depends only on `values.len()`, so splitting the halves
/// across threads gives the same bits as the serial evaluation.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let (s, c) = pairwise(values);
    s + c
}
