//! 2×2 unitary coins in Euler-angle, exponential-map and Cayley form, and the
//! exact maps from a mass-matrix sample to Euler angles.
//!
//! The Euler form is
//!
//! ```text
//! B = e^{−iξ} [  e^{iα} cos θ    e^{iβ} sin θ  ]
//!             [ −e^{−iβ} sin θ   e^{−iα} cos θ ]
//! ```
//!
//! The parameter maps never go through tangent identities: they build the
//! SU(2) part of the target matrix and read `α, β, θ` off its entries with
//! `atan2`/`arg`, so `|𝐌|Δt` near `π/2` is harmless.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::fields::Mass;
use crate::linalg::{Mat2, C64, I, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoinParams {
    pub xi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
}

impl CoinParams {
    pub fn new(xi: f64, alpha: f64, beta: f64, theta: f64) -> Self {
        CoinParams {
            xi,
            alpha,
            beta,
            theta,
        }
    }

    /// Largest absolute difference between corresponding angles.
    pub fn max_diff(&self, o: &CoinParams) -> f64 {
        [
            self.xi - o.xi,
            self.alpha - o.alpha,
            self.beta - o.beta,
            self.theta - o.theta,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// A unitary 2×2 matrix acting on one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin(Mat2);

impl Coin {
    pub fn identity() -> Self {
        Coin(Mat2::identity())
    }

    /// Accept `m` as a coin if `‖m·m† − I‖_max ≤ tol`.
    pub fn from_matrix(m: Mat2, tol: f64) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= tol) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not unitary: ‖U·U† − I‖_max = {defect:.3e} > {tol:.1e}"
            )));
        }
        Ok(Coin(m))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn det(&self) -> C64 {
        self.0.det()
    }

    /// Whether the coin lies in SU(2), i.e. `det = 1` within `tol`.
    pub fn is_special(&self, tol: f64) -> bool {
        (self.det() - ONE).norm() <= tol
    }
}

impl From<Coin> for Mat2 {
    fn from(c: Coin) -> Mat2 {
        c.0
    }
}

/// One site, one step: the mass matrix and the time step it is applied over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSample {
    pub mass: Mass,
    pub dt: f64,
}

impl MassSample {
    pub fn new(mass: Mass, dt: f64) -> Self {
        MassSample { mass, dt }
    }

    pub fn is_finite(&self) -> bool {
        self.mass.is_finite() && self.dt.is_finite()
    }
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

pub fn euler_coin(p: CoinParams) -> Coin {
    let phase = C64::from_polar(1.0, -p.xi);
    let (s, c) = p.theta.sin_cos();
    let ea = C64::from_polar(1.0, p.alpha);
    let eb = C64::from_polar(1.0, p.beta);
    Coin(Mat2::new(
        phase * ea * c,
        phase * eb * s,
        -phase * eb.conj() * s,
        phase * ea.conj() * c,
    ))
}

/// `(a, b)` with `a = cos(|𝐌|Δt) − i (Mz/|𝐌|) sin(|𝐌|Δt)` and
/// `b = −(My + i Mx)/|𝐌| · sin(|𝐌|Δt)`: the first row of `exp(−iΔt σ·𝐌)`.
fn exp_su2_row(m: &MassSample) -> (C64, C64) {
    let mass = &m.mass;
    let norm = mass.vector_norm();
    let (sin, cos) = (norm * m.dt).sin_cos();
    let s_over = if norm > 0.0 { sin / norm } else { m.dt };
    let a = C64::new(cos, -mass.mz * s_over);
    let b = C64::new(-mass.my * s_over, -mass.mx * s_over);
    (a, b)
}

/// `exp(−iΔt·M)` in closed form; `|𝐌| = 0` reduces to the pure phase.
pub fn exp_coin(m: MassSample) -> Coin {
    let phase = C64::from_polar(1.0, -m.mass.m0 * m.dt);
    let (a, b) = exp_su2_row(&m);
    Coin(Mat2::new(a, b, -b.conj(), a.conj()).scale(phase))
}

/// Cayley transform `(I + iΔt/2·M)⁻¹ (I − iΔt/2·M)`, by direct inversion.
pub fn cayley_coin(m: MassSample) -> Coin {
    let h = C64::new(0.0, 0.5 * m.dt);
    let mm = m.mass.matrix();
    let lhs = Mat2::identity() + mm.scale(h);
    let rhs = Mat2::identity() - mm.scale(h);
    // det(I + ihM) = (1 + ihλ₁)(1 + ihλ₂) has modulus ≥ 1 for Hermitian M.
    let l = &lhs.0;
    let inv = Mat2::new(l[1][1], -l[0][1], -l[1][0], l[0][0]).scale(lhs.det().inv());
    Coin(inv * rhs)
}

/// The transfer matrix written out entry by entry:
/// `T = N / C` with `C = 1 + iΔt M₀ − Δt²/4·M²`, `M² = M₀² − |𝐌|²` and
///
/// ```text
/// N = [ 1 − iΔt Mz + Δt²/4·M²     −Δt (i Mx + My)       ]
///     [ −Δt (i Mx − My)            1 + iΔt Mz + Δt²/4·M² ]
/// ```
///
/// Kept alongside [`cayley_coin`] as an independent route to the same matrix.
pub fn cayley_coin_explicit(m: MassSample) -> Mat2 {
    let Mass { m0, mx, my, mz } = m.mass;
    let dt = m.dt;
    let q = 0.25 * dt * dt * m.mass.invariant_sq();
    let c = C64::new(1.0 - q, dt * m0);
    let n = Mat2::new(
        C64::new(1.0 + q, -dt * mz),
        C64::new(-dt * my, -dt * mx),
        C64::new(dt * my, -dt * mx),
        C64::new(1.0 + q, dt * mz),
    );
    n.scale(c.inv())
}

/// Read `α, β, θ` off the SU(2) entries `a = V₀₀`, `b = V₀₁` with the
/// conventions `θ ∈ [−π/2, π/2]`, `β ∈ (−π/2, π/2]` (the sign of `θ` absorbs
/// the rest) and `β = 0` when `b = 0`, `α = 0` when `a = 0`.
fn params_from_su2(xi: f64, a: C64, b: C64) -> CoinParams {
    let (ma, mb) = (a.norm(), b.norm());
    let alpha = if ma > 0.0 { a.arg() } else { 0.0 };
    let theta_abs = mb.atan2(ma);
    let (beta, theta) = if mb > 0.0 {
        let beta = b.arg();
        if beta > FRAC_PI_2 {
            (beta - PI, -theta_abs)
        } else if beta <= -FRAC_PI_2 {
            (beta + PI, -theta_abs)
        } else {
            (beta, theta_abs)
        }
    } else {
        (0.0, theta_abs)
    };
    CoinParams {
        xi,
        alpha,
        beta,
        theta,
    }
}

/// Euler angles of the operator-splitting coin `exp(−iΔt·M)`; `ξ = M₀Δt`
/// (wrapped into `(−π, π]`).
pub fn euler_from_mass_split(m: MassSample) -> CoinParams {
    let xi = wrap_angle(m.mass.m0 * m.dt);
    let (a, b) = exp_su2_row(&m);
    params_from_su2(xi, a, b)
}

/// Euler angles of the QLB (Cayley) coin; `ξ = arg C`.
pub fn euler_from_mass_qlb(m: MassSample) -> CoinParams {
    let Mass { m0, mx, my, mz } = m.mass;
    let dt = m.dt;
    let q = 0.25 * dt * dt * m.mass.invariant_sq();
    let xi = (dt * m0).atan2(1.0 - q);
    // N = |C|·V with V ∈ SU(2); first row of N.
    let a = C64::new(1.0 + q, -dt * mz);
    let b = C64::new(-dt * my, -dt * mx);
    let scale = a.norm().hypot(b.norm());
    params_from_su2(xi, a / scale, b / scale)
}

/// Canonical Euler angles of a unitary matrix.
///
/// Canonical ranges: `ξ ∈ (−π, π]`, `α ∈ (−π/2, π/2]`, `β ∈ (−π/2, π/2]`,
/// `θ ∈ [−π/2, π/2]`. Restricting `α` and `β` to half-turns removes the two
/// discrete redundancies `(ξ, α, β) → (ξ+π, α+π, β+π)` and `(β, θ) → (β+π, −θ)`.
pub fn decompose_u2(c: &Mat2) -> Result<CoinParams> {
    let defect = c.unitarity_defect();
    if !(defect <= 1e-10) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not unitary: ‖U·U† − I‖_max = {defect:.3e}"
        )));
    }
    let mut xi = -0.5 * c.det().arg();
    let v = c.scale(C64::from_polar(1.0, xi));
    let (mut a, mut b) = (v.get(0, 0), v.get(0, 1));
    if a.norm() > 1e-300 {
        let arg = a.arg();
        if arg > FRAC_PI_2 || arg <= -FRAC_PI_2 {
            xi += PI;
            a = -a;
            b = -b;
        }
    }
    Ok(params_from_su2(wrap_angle(xi), a, b))
}

/// Euler-angle coin for a scheme's sample; a convenience for schedules.
pub fn coin_from_params(p: CoinParams) -> Mat2 {
    euler_coin(p).into()
}

/// `I − iΔt·M`, the (non-unitary) collision of the naive lattice Boltzmann scheme.
pub fn naive_transfer(m: MassSample) -> Mat2 {
    Mat2::identity() - m.mass.matrix().scale(I * m.dt)
}
