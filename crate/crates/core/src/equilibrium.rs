//! Relaxation form of a lattice step.
//!
//! With a local equilibrium `ψ_eq = Uψ`, `U = exp(iMτ)`, the collision can be
//! written as relaxation towards equilibrium, `ψ′ = ψ − ΔtΩ(ψ − ψ_eq)`,
//! followed by streaming. Two scattering operators are provided:
//!
//! * `Exact`: `Ω = iM(I − U)⁻¹`, which makes `Ω(ψ − ψ_eq) = iMψ` an identity.
//! * `Paper`: `Ω = iM(I + U)⁻¹`, which does not (kept for comparison).
//!
//! `Ω` is a function of `M`, so it is evaluated spectrally on the two
//! eigenspaces of `M`. That removes the spurious singularity of `(I − U)⁻¹`
//! at a zero eigenvalue of `M`, where `iλ/(1 − e^{iλτ}) → −1/τ`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fields::{Lattice1D, Mass, MassField, SpinorField1D, PAR_THRESHOLD};
use crate::fmt::g17;
use crate::linalg::{Mat2, C64, I, ONE};
use crate::walk;

use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaForm {
    #[default]
    Exact,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationConfig {
    pub tau: f64,
    pub omega_form: OmegaForm,
}

impl RelaxationConfig {
    pub fn new(tau: f64, omega_form: OmegaForm) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("relaxation tau must be positive, got {tau}")));
        }
        Ok(RelaxationConfig { tau, omega_form })
    }

    /// `τ = Δt`, exact form.
    pub fn for_lattice(lat: &Lattice1D) -> Self {
        RelaxationConfig {
            tau: lat.dt(),
            omega_form: OmegaForm::Exact,
        }
    }
}

/// `U = exp(iMτ)`.
pub fn equilibrium_unitary(m: Mass, tau: f64) -> Mat2 {
    crate::coin::exp_coin(crate::coin::MassSample::new(m, -tau)).into()
}

pub fn local_equilibrium(psi: [C64; 2], m: Mass, cfg: &RelaxationConfig) -> [C64; 2] {
    equilibrium_unitary(m, cfg.tau).apply(psi)
}

/// Scalar factor of `Ω` on an eigenspace with eigenvalue `λ`.
fn omega_factor(lambda: f64, cfg: &RelaxationConfig) -> Option<C64> {
    let half = 0.5 * lambda * cfg.tau;
    let rot = C64::from_polar(1.0, -half);
    match cfg.omega_form {
        // iλ/(1 − e^{2ih}) = −e^{−ih}·(h/sin h)/τ
        OmegaForm::Exact => {
            if half == 0.0 {
                return Some(C64::new(-1.0 / cfg.tau, 0.0));
            }
            let s = half.sin();
            if s.abs() <= 1e-12 * half.abs().max(1.0) {
                return None;
            }
            Some(-rot * (half / s) / cfg.tau)
        }
        // iλ/(1 + e^{2ih}) = i·e^{−ih}·(h/cos h)/τ
        OmegaForm::Paper => {
            let c = half.cos();
            if c.abs() <= 1e-12 {
                return None;
            }
            Some(I * rot * (half / c) / cfg.tau)
        }
    }
}

/// The configured scattering operator `Ω`; `site` only labels errors.
pub fn scattering_omega(m: Mass, cfg: &RelaxationConfig, site: Option<usize>) -> Result<Mat2> {
    let singular = |lambda: f64| {
        let which = match cfg.omega_form {
            OmegaForm::Exact => "I − U",
            OmegaForm::Paper => "I + U",
        };
        Error::Singular {
            site,
            detail: format!(
                "{which} is singular: eigenvalue λ = {lambda} of M gives λτ = {} (τ = {})",
                lambda * cfg.tau,
                cfg.tau
            ),
        }
    };
    let norm = m.vector_norm();
    let (lp, lm) = (m.m0 + norm, m.m0 - norm);
    let fp = omega_factor(lp, cfg).ok_or_else(|| singular(lp))?;
    if norm == 0.0 {
        return Ok(Mat2::scalar(fp));
    }
    let fm = omega_factor(lm, cfg).ok_or_else(|| singular(lm))?;
    // P± = (I ± σ·n)/2
    let sigma_n = Mat2::hermitian(0.0, m.mx / norm, m.my / norm, m.mz / norm);
    let sum = Mat2::identity().scale((fp + fm) * 0.5);
    Ok(sum + sigma_n.scale((fp - fm) * 0.5))
}

/// `‖Ω(I − U) − iM‖_max`, zero when `Ω` casts the step in relaxation form.
pub fn relax_residual(omega: &Mat2, m: Mass, cfg: &RelaxationConfig) -> f64 {
    let u = equilibrium_unitary(m, cfg.tau);
    (*omega * (Mat2::identity() - u)).dist(&m.matrix().scale(I))
}

/// Collide in relaxation form at each site, then stream.
///
/// With the exact `Ω` the collision is `ψ′ = (I − iΔtM)ψ`, i.e. the naive
/// scheme in its collide-then-stream order with `M` taken at the departure
/// site. The walk engine runs the same scheme as stream-then-collide; for a
/// uniform mass `n` steps here equal `S·(walk step)ⁿ⁻¹·C`.
pub fn post_collide<M: MassField>(
    f: &SpinorField1D,
    mass: &M,
    lat: &Lattice1D,
    cfg: &RelaxationConfig,
) -> Result<SpinorField1D> {
    let n = f.step_index;
    let dt = lat.dt();
    let collide = |j: usize| -> Result<[C64; 2]> {
        let m = mass.sample(j, n, lat);
        let omega = scattering_omega(m, cfg, Some(j))?;
        let psi = f.data[j];
        let eq = local_equilibrium(psi, m, cfg);
        let kick = omega.apply([psi[0] - eq[0], psi[1] - eq[1]]);
        Ok([psi[0] - kick[0] * dt, psi[1] - kick[1] * dt])
    };
    let collided: Result<Vec<[C64; 2]>> = if f.len() >= PAR_THRESHOLD {
        (0..f.len()).into_par_iter().map(collide).collect()
    } else {
        (0..f.len()).map(collide).collect()
    };
    let post = SpinorField1D {
        data: collided?,
        step_index: n,
    };
    let mut out = walk::shift(&post, lat);
    out.step_index = n + 1;
    Ok(out)
}

/// Unit null vector of `M` when `|det M| ≤ 1e-12·‖M‖_F²`; `M = 0` gives
/// `(1, 0)`. The phase is fixed so the larger component is real positive.
pub fn zero_modes(m: Mass) -> Option<[C64; 2]> {
    let mat = m.matrix();
    let fro2: f64 = mat.0.iter().flatten().map(|c| c.norm_sqr()).sum();
    if mat.det().norm() > 1e-12 * fro2 {
        return None;
    }
    let (vals, vecs) = mat.hermitian_eigen();
    let v = if vals[0].abs() <= vals[1].abs() { vecs[0] } else { vecs[1] };
    let big = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
    let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { ONE };
    Some([v[0] * phase, v[1] * phase])
}

/// Per-site diagnostics as CSV: `j,n,det_M,has_zero_mode,relax_residual`.
/// Sites where `Ω` is singular report `nan` for the residual.
pub fn write_diagnostics_csv<W: Write + ?Sized, M: MassField>(
    out: &mut W,
    mass: &M,
    lat: &Lattice1D,
    cfg: &RelaxationConfig,
    step: u64,
) -> std::io::Result<()> {
    writeln!(out, "j,n,det_M,has_zero_mode,relax_residual")?;
    for j in 0..lat.n_sites() {
        let m = mass.sample(j, step, lat);
        let det = m.matrix().det().re;
        let zero = zero_modes(m).is_some() as u8;
        let res = scattering_omega(m, cfg, Some(j))
            .map(|o| relax_residual(&o, m, cfg))
            .unwrap_or(f64::NAN);
        writeln!(out, "{j},{step},{},{zero},{}", g17(det), g17(res))?;
    }
    Ok(())
}
