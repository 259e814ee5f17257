//! Fourier analysis of the one-step operator and convergence studies.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::{solve, SchemeKind};
use crate::coin::{exp_coin, MassSample};
use crate::error::{Error, Result};
use crate::fields::{init_packet, ConstantMass, Lattice1D, Mass, MassField, PacketKind, SpinorField1D};
use crate::linalg::{Mat2, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// `max | |λ| − 1 |` over the two eigenvalues; zero for unitary schemes.
    pub modulus_defect: f64,
}

fn eigenvalues(m: &Mat2) -> [C64; 2] {
    let half_tr = m.trace() * 0.5;
    let disc = (half_tr * half_tr - m.det()).sqrt();
    [half_tr + disc, half_tr - disc]
}

/// `ω(k)` for a constant mass: eigenvalues `λ` of the symbol `B·S(k)` with
/// `S(k) = diag(e^{−ikΔz}, e^{ikΔz})`, and `ω = −arg(λ)/Δt`.
pub fn dispersion(kind: SchemeKind, mass: Mass, lat: &Lattice1D, ks: &[f64]) -> Result<Vec<DispersionPoint>> {
    lat.require_cfl_one()?;
    let (dz, dt) = (lat.dz(), lat.dt());
    let coin = kind.coin(MassSample::new(mass, dt));
    Ok(ks
        .par_iter()
        .map(|&k| {
            let s = Mat2::diag(C64::from_polar(1.0, -k * dz), C64::from_polar(1.0, k * dz));
            let lams = eigenvalues(&(coin * s));
            let w = lams.map(|l| -l.arg() / dt);
            DispersionPoint {
                k,
                omega_plus: w[0].max(w[1]),
                omega_minus: w[0].min(w[1]),
                modulus_defect: lams.iter().fold(0.0, |a, l| a.max((l.norm() - 1.0).abs())),
            }
        })
        .collect())
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Exact positive-energy plane wave of `i∂ₜψ = (kσz + M)ψ` at time `t`,
/// normalised on `lat`. `k` must be a lattice wavenumber for periodicity.
pub fn plane_wave(mass: Mass, k: f64, lat: &Lattice1D, t: f64) -> SpinorField1D {
    let symbol = Mat2::pauli_z().scale(C64::new(k, 0.0)) + mass.matrix();
    let (vals, vecs) = symbol.hermitian_eigen();
    let (omega, u) = (vals[1], vecs[1]);
    let amp = 1.0 / lat.length().sqrt();
    let data = (0..lat.n_sites())
        .map(|j| {
            let ph = C64::from_polar(amp, k * lat.z(j) - omega * t);
            [u[0] * ph, u[1] * ph]
        })
        .collect();
    SpinorField1D { data, step_index: 0 }
}

/// Physical box and final time shared by every refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSetup {
    pub length: f64,
    pub t_final: f64,
    pub dts: Vec<f64>,
}

impl ConvergenceSetup {
    fn lattice(&self, dt: f64) -> Result<(Lattice1D, u64)> {
        let n = whole(self.length / dt, "length / dt")?;
        let steps = whole(self.t_final / dt, "t_final / dt")?;
        Ok((Lattice1D::flat(n as usize, dt)?, steps))
    }
}

fn whole(x: f64, what: &str) -> Result<u64> {
    let r = x.round();
    if !(r >= 1.0) || (x - r).abs() > 1e-9 * x.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!("{what} = {x} is not a whole number")));
    }
    Ok(r as u64)
}

#[derive(Clone)]
pub enum Reference {
    /// Constant mass, exact plane wave with `mode` periods across the box.
    AnalyticPlaneWave { mass: Mass, mode: i64 },
    /// Arbitrary mass field against the same scheme run `ratio` times finer
    /// than the finest level, starting from `packet`.
    FineGrid {
        mass: Arc<dyn MassField>,
        packet: PacketKind,
        weights: [C64; 2],
        ratio: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// Fitted order of the final-time L² error.
    pub order: f64,
    /// Plane-wave only: errors with input and output read in the half-step
    /// frame `ψ → e^{∓iΔtM/2}ψ`, which removes the O(Δt) offset between the
    /// scheme's eigenvectors and the continuum ones.
    pub symmetrized_errors: Option<Vec<f64>>,
    pub symmetrized_order: Option<f64>,
    pub warnings: Vec<String>,
}

fn l2_error(a: &SpinorField1D, b: &SpinorField1D, dz: f64) -> f64 {
    a.l2_diff(b, dz)
}

fn apply_uniform(f: &SpinorField1D, m: Mat2) -> SpinorField1D {
    SpinorField1D {
        data: f.data.iter().map(|p| m.apply(*p)).collect(),
        step_index: f.step_index,
    }
}

/// Observed order of accuracy of `kind` under `dt`-refinement at fixed
/// physical box and final time.
pub fn convergence_order(kind: SchemeKind, reference: &Reference, setup: &ConvergenceSetup) -> Result<ConvergenceReport> {
    if setup.dts.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "convergence needs at least 3 refinement levels, got {}",
            setup.dts.len()
        )));
    }
    let mut errors = Vec::with_capacity(setup.dts.len());
    let mut sym = Vec::new();
    match reference {
        Reference::AnalyticPlaneWave { mass, mode } => {
            let k = 2.0 * PI * (*mode as f64) / setup.length;
            for &dt in &setup.dts {
                let (lat, steps) = setup.lattice(dt)?;
                let exact = plane_wave(*mass, k, &lat, setup.t_final);
                let init = plane_wave(*mass, k, &lat, 0.0);
                let raw = solve(kind, ConstantMass(*mass), &lat, init.clone(), steps)?;
                errors.push(l2_error(&raw, &exact, lat.dz()));

                let half = exp_coin(MassSample::new(*mass, 0.5 * dt));
                let back = exp_coin(MassSample::new(*mass, -0.5 * dt));
                let shifted = apply_uniform(&init, *half.matrix());
                let out = solve(kind, ConstantMass(*mass), &lat, shifted, steps)?;
                sym.push(l2_error(&apply_uniform(&out, *back.matrix()), &exact, lat.dz()));
            }
        }
        Reference::FineGrid {
            mass,
            packet,
            weights,
            ratio,
        } => {
            let finest = setup.dts.iter().cloned().fold(f64::INFINITY, f64::min);
            let dt_ref = finest / (*ratio).max(2) as f64;
            let (ref_lat, ref_steps) = setup.lattice(dt_ref)?;
            let init = init_packet(&ref_lat, *packet, *weights)?;
            let reference = solve(kind, mass.as_ref(), &ref_lat, init, ref_steps)?;
            for &dt in &setup.dts {
                let (lat, steps) = setup.lattice(dt)?;
                let stride = whole(dt / dt_ref, "dt / dt_ref")? as usize;
                let init = init_packet(&lat, *packet, *weights)?;
                let out = solve(kind, mass.as_ref(), &lat, init, steps)?;
                let sampled = SpinorField1D {
                    data: (0..lat.n_sites()).map(|j| reference.data[j * stride]).collect(),
                    step_index: out.step_index,
                };
                errors.push(l2_error(&out, &sampled, dt));
            }
        }
    }
    let mut warnings = Vec::new();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    if !monotone {
        warnings.push(format!("error sequence is not monotone under refinement: {errors:?}"));
    }
    let order = least_squares_slope(&setup.dts, &errors);
    let (symmetrized_errors, symmetrized_order) = if sym.is_empty() {
        (None, None)
    } else {
        let o = least_squares_slope(&setup.dts, &sym);
        (Some(sym), Some(o))
    };
    Ok(ConvergenceReport {
        dts: setup.dts.clone(),
        errors,
        order,
        symmetrized_errors,
        symmetrized_order,
        warnings,
    })
}

/// Order at which two schemes approach each other: slope of
/// `‖ψ_a − ψ_b‖` at the final time under refinement, from the same packet.
pub fn scheme_gap_order(
    a: SchemeKind,
    b: SchemeKind,
    mass: &dyn MassField,
    packet: PacketKind,
    weights: [C64; 2],
    setup: &ConvergenceSetup,
) -> Result<(Vec<f64>, f64)> {
    let mut gaps = Vec::new();
    for &dt in &setup.dts {
        let (lat, steps) = setup.lattice(dt)?;
        let init = init_packet(&lat, packet, weights)?;
        let fa = solve(a, mass, &lat, init.clone(), steps)?;
        let fb = solve(b, mass, &lat, init, steps)?;
        gaps.push(l2_error(&fa, &fb, dt));
    }
    let order = least_squares_slope(&setup.dts, &gaps);
    Ok((gaps, order))
}
