//! Finite-volume QLB for `∂ₜψ + σz A(z) ∂zψ = Q(z,t) ψ` on a static metric.
//!
//! Written in conservative form, `∂ₜψ + ∂z[σz A ψ] = Q′ψ` with
//! `Q′ = Q + (∂zA)σz`. Integrating over the cell `[j − ½, j + ½]` with upwind
//! fluxes (`ψ₁` moves up and `ψ₂` moves down) and Crank–Nicolson along the
//! characteristics gives
//!
//! ```text
//! (I − Δt/2·Q′ⱼ) ψⱼⁿ⁺¹ = (1 − Aⱼ/c) ψⱼⁿ + T′ⱼ (ψ₁,ⱼ₋₁ⁿ, ψ₂,ⱼ₊₁ⁿ)
//!
//! T′ⱼ = [ Aⱼ₋₁/c + Δt/2·Q′₁₁,ⱼ₋₁    Δt/2·Q′₁₂,ⱼ₊₁          ]
//!       [ Δt/2·Q′₂₁,ⱼ₋₁             Aⱼ₊₁/c + Δt/2·Q′₂₂,ⱼ₊₁ ]
//! ```
//!
//! with `c = Δz/Δt`. Inverting the left-hand block yields the residency form
//! `ψⱼⁿ⁺¹ = Rψⱼⁿ + T(ψ₁,ⱼ₋₁ⁿ, ψ₂,ⱼ₊₁ⁿ)`, run by the walk engine.
//!
//! The second component is derived from the same flux rules as the first:
//! `ψ₂` enters cell `j` from `j + 1` carrying `Aⱼ₊₁`. For `A ≡ c` and a uniform
//! `Q = −iM` the update is exactly the flat QLB step.

use std::sync::Arc;

use rayon::prelude::*;

use crate::coin::MassSample;
use crate::error::{Error, Result};
use crate::fields::{init_packet, Lattice1D, MassField, PacketKind, SpinorField1D, PAR_THRESHOLD};
use crate::linalg::{Mat2, C64};
use crate::solvers::{least_squares_slope, ConvergenceReport};
use crate::walk::{self, TableSchedule};

/// Advection speed `A(z)` in the same units as `c`.
#[derive(Debug, Clone, PartialEq)]
pub enum AProfile {
    Constant(f64),
    /// `a0·(1 + eps·z)`
    Linear { a0: f64, eps: f64 },
    /// `a0·(1 − depth·exp(−(z − center)²/(2 width²)))`
    GaussianBump {
        a0: f64,
        depth: f64,
        center: f64,
        width: f64,
    },
    /// One value per site; does not refine.
    Sampled(Vec<f64>),
}

impl AProfile {
    pub fn value(&self, site: usize, lat: &Lattice1D) -> f64 {
        let z = lat.z(site);
        match self {
            AProfile::Constant(a) => *a,
            AProfile::Linear { a0, eps } => a0 * (1.0 + eps * z),
            AProfile::GaussianBump {
                a0,
                depth,
                center,
                width,
            } => a0 * (1.0 - depth * (-(z - center).powi(2) / (2.0 * width * width)).exp()),
            AProfile::Sampled(v) => v[site % v.len()],
        }
    }
}

/// Gravitational collision matrix `Q` sampled at site `j`, step `n`.
pub trait QField: Send + Sync {
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mat2;
}

impl<T: QField + ?Sized> QField for &T {
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mat2 {
        (**self).sample(site, step, lat)
    }
}

impl<T: QField + ?Sized> QField for Arc<T> {
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mat2 {
        (**self).sample(site, step, lat)
    }
}

pub struct ZeroQ;

impl QField for ZeroQ {
    fn sample(&self, _site: usize, _step: u64, _lat: &Lattice1D) -> Mat2 {
        Mat2::zero()
    }
}

/// `Q = −iM`: the flat Dirac collision for a mass field.
pub struct MassQ<M>(pub M);

impl<M: MassField> QField for MassQ<M> {
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mat2 {
        self.0.sample(site, step, lat).matrix().scale(C64::new(0.0, -1.0))
    }
}

/// `Q` as a function of physical `(z, t)`.
pub struct FnQ<F>(pub F);

impl<F> QField for FnQ<F>
where
    F: Fn(f64, f64) -> Mat2 + Send + Sync,
{
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mat2 {
        (self.0)(lat.z(site), step as f64 * lat.dt())
    }
}

/// Tabulated `Q`, one table per step; steps past the last table reuse it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledQ {
    pub steps: Vec<Vec<Mat2>>,
}

impl QField for SampledQ {
    fn sample(&self, site: usize, step: u64, _lat: &Lattice1D) -> Mat2 {
        let table = &self.steps[(step as usize).min(self.steps.len() - 1)];
        table[site % table.len()]
    }
}

pub struct CurvedConfig<Q> {
    pub a: AProfile,
    pub q: Q,
}

/// Residency and transfer matrices of one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTPair {
    pub r: Mat2,
    pub t: Mat2,
}

/// The finite-volume blocks before the left-hand side is inverted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FvBlocks {
    pub lhs: Mat2,
    pub r: Mat2,
    pub t: Mat2,
}

impl<Q: QField> CurvedConfig<Q> {
    pub fn new(a: AProfile, q: Q) -> Self {
        CurvedConfig { a, q }
    }

    /// Every `Aⱼ` must lie in `(0, c]`.
    pub fn validate(&self, lat: &Lattice1D) -> Result<()> {
        let c = lat.speed();
        for j in 0..lat.n_sites() {
            let a = self.a.value(j, lat);
            if !(a > 0.0 && a <= c * (1.0 + 1e-12)) {
                return Err(Error::InvalidConfiguration(format!(
                    "advection speed A = {a} at site {j} is outside (0, c] with c = {c}"
                )));
            }
        }
        Ok(())
    }

    /// `∂zA` at site `j`: central differences inside, one-sided at the first
    /// and last site.
    pub fn a_derivative(&self, site: usize, lat: &Lattice1D) -> f64 {
        let last = lat.n_sites() - 1;
        let a = |j| self.a.value(j, lat);
        let dz = lat.dz();
        match site {
            0 => (a(1) - a(0)) / dz,
            j if j == last => (a(last) - a(last - 1)) / dz,
            j => (a(j + 1) - a(j - 1)) / (2.0 * dz),
        }
    }

    /// `Q′ⱼ,ₙ = Qⱼ,ₙ + (∂zA)ⱼ σz`
    pub fn effective_q(&self, site: usize, step: u64, lat: &Lattice1D) -> Mat2 {
        let da = self.a_derivative(site, lat);
        self.q.sample(site, step, lat) + Mat2::pauli_z().scale(C64::new(da, 0.0))
    }

    pub fn fv_blocks(&self, site: usize, step: u64, lat: &Lattice1D) -> FvBlocks {
        let c = lat.speed();
        let h = C64::new(0.5 * lat.dt(), 0.0);
        let (jl, jr) = (lat.left_or_self(site), lat.right_or_self(site));
        let qj = self.effective_q(site, step, lat);
        let ql = self.effective_q(jl, step, lat);
        let qr = self.effective_q(jr, step, lat);
        let lhs = Mat2::identity() - qj.scale(h);
        let stay = 1.0 - self.a.value(site, lat) / c;
        let r = Mat2::scalar(C64::new(stay, 0.0));
        let t = Mat2::new(
            C64::new(self.a.value(jl, lat) / c, 0.0) + ql.get(0, 0) * h,
            qr.get(0, 1) * h,
            ql.get(1, 0) * h,
            C64::new(self.a.value(jr, lat) / c, 0.0) + qr.get(1, 1) * h,
        );
        FvBlocks { lhs, r, t }
    }

    pub fn build_rt(&self, site: usize, step: u64, lat: &Lattice1D) -> Result<RTPair> {
        let b = self.fv_blocks(site, step, lat);
        let inv = b.lhs.inverse(1e-14).ok_or_else(|| Error::Singular {
            site: Some(site),
            detail: format!("implicit block I − Δt/2·Q′ is singular (det = {})", b.lhs.det()),
        })?;
        Ok(RTPair {
            r: inv * b.r,
            t: inv * b.t,
        })
    }

    /// Per-site (R, T) tables for one step.
    pub fn schedule(&self, step: u64, lat: &Lattice1D) -> Result<TableSchedule> {
        let n = lat.n_sites();
        let build = |j| self.build_rt(j, step, lat);
        let pairs: Result<Vec<RTPair>> = if n >= PAR_THRESHOLD {
            (0..n).into_par_iter().map(build).collect()
        } else {
            (0..n).map(build).collect()
        };
        let pairs = pairs?;
        Ok(TableSchedule {
            transfer: pairs.iter().map(|p| p.t).collect(),
            residency: Some(pairs.iter().map(|p| p.r).collect()),
        })
    }
}

pub fn curved_step<Q: QField>(f: &SpinorField1D, cfg: &CurvedConfig<Q>, lat: &Lattice1D) -> Result<SpinorField1D> {
    let sched = cfg.schedule(f.step_index, lat)?;
    let out = walk::step_with_residency(f, lat, &sched);
    out.check_finite()?;
    Ok(out)
}

pub fn curved_evolve<Q: QField>(
    f: SpinorField1D,
    cfg: &CurvedConfig<Q>,
    lat: &Lattice1D,
    n_steps: u64,
    mut observer: Option<&mut walk::Observer<'_>>,
) -> Result<SpinorField1D> {
    cfg.validate(lat)?;
    if let Some(obs) = observer.as_deref_mut() {
        obs.notify(&f)?;
    }
    let mut cur = f;
    for _ in 0..n_steps {
        cur = curved_step(&cur, cfg, lat)?;
        if let Some(obs) = observer.as_deref_mut() {
            obs.notify(&cur)?;
        }
    }
    Ok(cur)
}

/// Refinement study for the curved scheme with `Δz = Δt` at every level,
/// against the same scheme run `ratio` times finer than the finest level.
pub struct CurvedRefinement {
    pub length: f64,
    pub t_final: f64,
    pub dzs: Vec<f64>,
    pub packet: PacketKind,
    pub weights: [C64; 2],
    pub ratio: usize,
}

fn level(length: f64, t_final: f64, dz: f64) -> Result<(Lattice1D, u64)> {
    let n = length / dz;
    let s = t_final / dz;
    let ok = |x: f64| x >= 1.0 && (x - x.round()).abs() <= 1e-9 * x;
    if !ok(n) || !ok(s) {
        return Err(Error::InvalidArgument(format!(
            "dz = {dz} does not divide length {length} and final time {t_final}"
        )));
    }
    Ok((Lattice1D::flat(n.round() as usize, dz)?, s.round() as u64))
}

pub fn curved_convergence<Q: QField>(cfg: &CurvedConfig<Q>, study: &CurvedRefinement) -> Result<ConvergenceReport> {
    if study.dzs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "convergence needs at least 3 refinement levels, got {}",
            study.dzs.len()
        )));
    }
    let finest = study.dzs.iter().cloned().fold(f64::INFINITY, f64::min);
    let dz_ref = finest / study.ratio.max(2) as f64;
    let (ref_lat, ref_steps) = level(study.length, study.t_final, dz_ref)?;
    let reference = curved_evolve(
        init_packet(&ref_lat, study.packet, study.weights)?,
        cfg,
        &ref_lat,
        ref_steps,
        None,
    )?;
    let mut errors = Vec::new();
    for &dz in &study.dzs {
        let (lat, steps) = level(study.length, study.t_final, dz)?;
        let stride = (dz / dz_ref).round() as usize;
        let out = curved_evolve(init_packet(&lat, study.packet, study.weights)?, cfg, &lat, steps, None)?;
        let sampled = SpinorField1D {
            data: (0..lat.n_sites()).map(|j| reference.data[j * stride]).collect(),
            step_index: out.step_index,
        };
        errors.push(out.l2_diff(&sampled, dz));
    }
    let mut warnings = Vec::new();
    if !errors.windows(2).all(|w| w[1] < w[0]) {
        warnings.push(format!("error sequence is not monotone under refinement: {errors:?}"));
    }
    Ok(ConvergenceReport {
        order: least_squares_slope(&study.dzs, &errors),
        dts: study.dzs.clone(),
        errors,
        symmetrized_errors: None,
        symmetrized_order: None,
        warnings,
    })
}

/// Flat QLB transfer matrix for the same sample, for comparisons.
pub fn flat_transfer(m: MassSample) -> Mat2 {
    crate::coin::cayley_coin(m).into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ConstantMass, FnMass, Mass};
    use crate::linalg::{ONE, ZERO};
    use crate::solvers::{solve, SchemeKind};
    use std::sync::Arc;

    fn lat(n: usize) -> Lattice1D {
        Lattice1D::flat(n, 0.5).unwrap()
    }

    #[test]
    fn effective_q_examples() {
        let l = lat(16);
        let m = Mass::new(0.1, 0.2, 0.3, 0.4);
        let cfg = CurvedConfig::new(AProfile::Constant(1.0), MassQ(ConstantMass(m)));
        let expect = m.matrix().scale(C64::new(0.0, -1.0));
        assert_eq!(cfg.effective_q(5, 0, &l), expect);

        let (c, eps) = (1.0, 0.01);
        let cfg = CurvedConfig::new(AProfile::Linear { a0: c, eps }, ZeroQ);
        for j in [0, 7, 15] {
            let q = cfg.effective_q(j, 0, &l);
            assert!((q.get(0, 0).re - c * eps).abs() < 1e-13, "site {j}");
            assert!((q.get(1, 1).re + c * eps).abs() < 1e-13);
        }
    }

    #[test]
    fn one_sided_difference_at_ends() {
        let l = lat(8);
        let cfg = CurvedConfig::new(AProfile::Sampled(vec![1.0, 0.9, 0.7, 0.6, 0.6, 0.6, 0.5, 0.2]), ZeroQ);
        assert!((cfg.a_derivative(0, &l) - (-0.1 / 0.5)).abs() < 1e-14);
        assert!((cfg.a_derivative(7, &l) - (-0.3 / 0.5)).abs() < 1e-14);
        assert!((cfg.a_derivative(3, &l) - (-0.1 / 1.0)).abs() < 1e-14);
    }

    #[test]
    fn uniform_grid_reduces_to_qlb_transfer() {
        let l = lat(16);
        let m = Mass::new(0.3, -0.5, 0.8, 0.2);
        let cfg = CurvedConfig::new(AProfile::Constant(l.speed()), MassQ(ConstantMass(m)));
        let rt = cfg.build_rt(4, 0, &l).unwrap();
        assert!(rt.r.max_abs() < 1e-15);
        assert!(rt.t.dist(&flat_transfer(MassSample::new(m, l.dt()))) < 1e-14);
        let free = CurvedConfig::new(AProfile::Constant(l.speed()), ZeroQ).build_rt(4, 0, &l).unwrap();
        assert_eq!(free.t, Mat2::identity());
        assert_eq!(free.r, Mat2::zero());
    }

    #[test]
    fn half_speed_splits_delta() {
        let l = lat(16);
        let cfg = CurvedConfig::new(AProfile::Constant(0.5 * l.speed()), ZeroQ);
        let rt = cfg.build_rt(3, 0, &l).unwrap();
        let half = Mat2::scalar(C64::new(0.5, 0.0));
        assert_eq!(rt.r, half);
        assert_eq!(rt.t, half);
        let f = init_packet(&l, PacketKind::Delta { site: 6 }, [ONE, ZERO]).unwrap();
        let a = f.data[6][0];
        let out = curved_step(&f, &cfg, &l).unwrap();
        assert_eq!(out.data[6][0], a * 0.5);
        assert_eq!(out.data[7][0], a * 0.5);
    }

    #[test]
    fn amplitude_routing_sums_to_one() {
        // Q = −A′σz cancels the metric term so Q′ = 0 and nothing is mixed.
        let l = lat(32);
        let profile = AProfile::GaussianBump {
            a0: 1.0,
            depth: 0.4,
            center: 8.0,
            width: 2.0,
        };
        let probe = CurvedConfig::new(profile.clone(), ZeroQ);
        let derivs: Vec<f64> = (0..32).map(|j| probe.a_derivative(j, &l)).collect();
        let q = SampledQ {
            steps: vec![derivs.iter().map(|d| Mat2::pauli_z().scale(C64::new(-d, 0.0))).collect()],
        };
        let cfg = CurvedConfig::new(profile, q);
        for j in 0..32 {
            let here = cfg.fv_blocks(j, 0, &l);
            let up = cfg.fv_blocks(l.right(j).unwrap(), 0, &l);
            let down = cfg.fv_blocks(l.left(j).unwrap(), 0, &l);
            assert!((here.r.get(0, 0).re + up.t.get(0, 0).re - 1.0).abs() < 1e-14);
            assert!((here.r.get(1, 1).re + down.t.get(1, 1).re - 1.0).abs() < 1e-14);
            assert_eq!(here.lhs, Mat2::identity());
        }
    }

    #[test]
    fn flat_step_matches_qlb() {
        let l = lat(64);
        let m = Mass::new(0.2, 0.3, -0.6, 0.1);
        let cfg = CurvedConfig::new(AProfile::Constant(1.0), MassQ(ConstantMass(m)));
        let f = init_packet(&l, PacketKind::gaussian(2.0, 0.8), [ONE, C64::new(0.0, 1.0)]).unwrap();
        let a = curved_step(&f, &cfg, &l).unwrap();
        let b = solve(SchemeKind::Qlb, ConstantMass(m), &l, f, 1).unwrap();
        assert!(a.max_diff(&b) <= 1e-14);
    }

    #[test]
    fn locality() {
        let l = lat(16);
        let base: Vec<f64> = (0..16).map(|j| 0.6 + 0.02 * j as f64).collect();
        let mut bumped = base.clone();
        bumped[10] = 0.95;
        let q = |a: Vec<f64>| CurvedConfig::new(AProfile::Sampled(a), ZeroQ);
        let (c0, c1) = (q(base), q(bumped));
        for j in 0..16 {
            let same = c0.build_rt(j, 0, &l).unwrap() == c1.build_rt(j, 0, &l).unwrap();
            // A at 10 enters ∂A at 9 and 11, and through them Q′ at 8..=12.
            assert_eq!(same, !(8..=12).contains(&j), "site {j}");
        }
    }

    #[test]
    fn rejects_superluminal_advection() {
        let l = lat(16);
        let cfg = CurvedConfig::new(AProfile::Linear { a0: 0.9, eps: 0.1 }, ZeroQ);
        assert!(matches!(cfg.validate(&l), Err(Error::InvalidConfiguration(_))));
    }

    fn study(dzs: &[f64]) -> CurvedRefinement {
        CurvedRefinement {
            length: 25.6,
            t_final: 3.2,
            dzs: dzs.to_vec(),
            packet: PacketKind::Gaussian {
                sigma: 1.5,
                k0: 0.5,
                center: Some(12.8),
            },
            weights: [ONE, ONE],
            ratio: 4,
        }
    }

    #[test]
    fn smooth_metric_is_first_order() {
        let cfg = CurvedConfig::new(
            AProfile::GaussianBump {
                a0: 1.0,
                depth: 0.3,
                center: 12.8,
                width: 3.0,
            },
            ZeroQ,
        );
        let rep = curved_convergence(&cfg, &study(&[0.1, 0.05, 0.025])).unwrap();
        assert!(rep.order >= 0.9, "{rep:?}");
    }

    #[test]
    fn flat_config_inherits_qlb_order() {
        let mass = FnMass(|z: f64, _t: f64| Mass::free(0.8 + 0.1 * (z * 0.245).sin()));
        let cfg = CurvedConfig::new(AProfile::Constant(1.0), MassQ(&mass));
        let s = study(&[0.1, 0.05, 0.025]);
        let curved = curved_convergence(&cfg, &s).unwrap();
        let mass: Arc<dyn MassField> = Arc::new(mass);
        let flat = crate::solvers::convergence_order(
            SchemeKind::Qlb,
            &crate::solvers::Reference::FineGrid {
                mass,
                packet: s.packet,
                weights: s.weights,
                ratio: s.ratio,
            },
            &crate::solvers::ConvergenceSetup {
                length: s.length,
                t_final: s.t_final,
                dts: s.dzs.clone(),
            },
        )
        .unwrap();
        // Q′ is taken at the foot of each characteristic, so the two schemes
        // differ for a varying mass but share the same order.
        assert!((curved.order - flat.order).abs() < 0.15, "{} vs {}", curved.order, flat.order);
    }
}
