//! Dirac matrices in the streaming basis used by the 2-D solver.
//!
//! The solver stores `ψ = (u₁, u₂, d₁, d₂)`: `u` components stream towards
//! `+z`, `d` components towards `−z`. Starting from the Dirac representation
//!
//! ```text
//! γ⁰ = diag(I, −I),  γᵏ = [[0, σₖ], [−σₖ, 0]],  γ⁵ = iγ⁰γ¹γ²γ³
//! ```
//!
//! the streaming basis is `W = (u₁, u₂, d₁, d₂)` with `u₁ = (1,0,1,0)/√2`,
//! `u₂ = (0,1,0,−1)/√2` (the `+1` eigenvectors of `αz = γ⁰γ³`) and
//! `dₐ = −iγ⁰uₐ`. In that basis
//!
//! ```text
//! α̃z = σz⊗I    α̃y = −σx⊗σx    α̃x = σx⊗σy
//! β̃  = σy⊗I    γ̃⁵ = σz⊗σz     γ̃⁰γ̃⁵ = iσx⊗σz
//! ```
//!
//! where the first Kronecker factor acts on (u, d) and the second on the
//! spin index. Each block of `β̃` is the 1-D Majorana mass `σy`, so a
//! y-uniform 2-D state evolves exactly like two copies of the 1-D scheme.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::linalg::{Mat2, Mat4, C64};

pub fn alpha_z() -> Mat4 {
    Mat4::kron(&Mat2::pauli_z(), &Mat2::identity())
}

pub fn alpha_y() -> Mat4 {
    Mat4::kron(&Mat2::pauli_x(), &Mat2::pauli_x()).scale(C64::new(-1.0, 0.0))
}

pub fn alpha_x() -> Mat4 {
    Mat4::kron(&Mat2::pauli_x(), &Mat2::pauli_y())
}

pub fn beta() -> Mat4 {
    Mat4::kron(&Mat2::pauli_y(), &Mat2::identity())
}

pub fn gamma5() -> Mat4 {
    Mat4::kron(&Mat2::pauli_z(), &Mat2::pauli_z())
}

/// `γ̃⁰γ̃⁵`; anti-Hermitian, so `ψ†γ̃⁰γ̃⁵ψ` is purely imaginary.
pub fn gamma0_gamma5() -> Mat4 {
    Mat4::kron(&Mat2::pauli_x(), &Mat2::pauli_z()).scale(C64::new(0.0, 1.0))
}

/// Orthogonal map to the eigenbasis of `α̃y`: columns `|+−⟩, |−+⟩, |++⟩, |−−⟩`
/// with `|±⟩ = (1, ±1)/√2`, so `R†α̃yR = diag(1, 1, −1, −1)`.
pub fn rotation_y() -> Mat4 {
    let plus = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    let minus = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
    let cols = [(plus, minus), (minus, plus), (plus, plus), (minus, minus)];
    let mut rows = [[0.0; 4]; 4];
    for (c, (a, b)) in cols.iter().enumerate() {
        for i in 0..2 {
            for k in 0..2 {
                rows[2 * i + k][c] = a[i] * b[k];
            }
        }
    }
    Mat4::from_real(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{I, ONE, ZERO};

    fn block(a: Mat2, b: Mat2, c: Mat2, d: Mat2) -> Mat4 {
        let mut m = Mat4::zero();
        for r in 0..2 {
            for k in 0..2 {
                m.0[r][k] = a.0[r][k];
                m.0[r][k + 2] = b.0[r][k];
                m.0[r + 2][k] = c.0[r][k];
                m.0[r + 2][k + 2] = d.0[r][k];
            }
        }
        m
    }

    struct DiracRep {
        g0: Mat4,
        g: [Mat4; 3],
    }

    fn dirac() -> DiracRep {
        let z = Mat2::zero();
        let g0 = block(Mat2::identity(), z, z, -Mat2::identity());
        let g = [Mat2::pauli_x(), Mat2::pauli_y(), Mat2::pauli_z()].map(|s| block(z, s, -s, z));
        DiracRep { g0, g }
    }

    fn basis() -> Mat4 {
        let s = FRAC_1_SQRT_2;
        let u1 = [ONE * s, ZERO, ONE * s, ZERO];
        let u2 = [ZERO, ONE * s, ZERO, -ONE * s];
        let g0 = dirac().g0;
        let d1 = g0.apply(u1).map(|c| -I * c);
        let d2 = g0.apply(u2).map(|c| -I * c);
        let mut w = Mat4::zero();
        for (col, v) in [u1, u2, d1, d2].iter().enumerate() {
            for r in 0..4 {
                w.0[r][col] = v[r];
            }
        }
        w
    }

    fn to_streaming(m: &Mat4) -> Mat4 {
        let w = basis();
        w.adjoint() * *m * w
    }

    #[test]
    fn streaming_basis_is_unitary() {
        assert!(basis().unitarity_defect() < 1e-15);
        assert!(rotation_y().unitarity_defect() < 1e-15);
    }

    #[test]
    fn matrices_follow_from_dirac_representation() {
        let d = dirac();
        let g5 = (d.g0 * d.g[0] * d.g[1] * d.g[2]).scale(I);
        assert!(to_streaming(&d.g0).dist(&beta()) < 1e-15);
        assert!(to_streaming(&(d.g0 * d.g[2])).dist(&alpha_z()) < 1e-15);
        assert!(to_streaming(&(d.g0 * d.g[1])).dist(&alpha_y()) < 1e-15);
        assert!(to_streaming(&(d.g0 * d.g[0])).dist(&alpha_x()) < 1e-15);
        assert!(to_streaming(&g5).dist(&gamma5()) < 1e-15);
        assert!(to_streaming(&(d.g0 * g5)).dist(&gamma0_gamma5()) < 1e-15);
    }

    #[test]
    fn clifford_algebra() {
        let ms = [alpha_x(), alpha_y(), alpha_z(), beta()];
        for (i, a) in ms.iter().enumerate() {
            assert!((*a * *a).dist(&Mat4::identity()) < 1e-15);
            for b in ms.iter().skip(i + 1) {
                assert!((*a * *b + *b * *a).max_abs() < 1e-15);
            }
        }
        let g0g5 = gamma0_gamma5();
        assert!((g0g5.adjoint() + g0g5).max_abs() < 1e-15);
    }

    #[test]
    fn rotation_diagonalises_alpha_y() {
        let r = rotation_y();
        let d = r.adjoint() * alpha_y() * r;
        assert!(d.dist(&alpha_z()) < 1e-15);
    }
}
