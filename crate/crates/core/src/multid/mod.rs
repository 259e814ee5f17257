//! (2+1)-D Dirac solver by dimensional splitting.
//!
//! One step is: stream along `z`, rotate into the eigenbasis of `α̃y`, stream
//! along `y`, rotate back, then collide locally with the Cayley transform of
//! `H_loc = β̃(m − gS) + V − g·P·γ̃⁰γ̃⁵`, where `S = ψ†β̃ψ` and
//! `P = ψ†γ̃⁰γ̃⁵ψ` are the NJL condensates at the pre-collision state. `H_loc`
//! is Hermitian for any state, so the collision stays unitary even with the
//! nonlinearity switched on. Both directions use `Δz = Δy = Δt` and periodic
//! boundaries. See [`dirac`] for the matrices.

pub mod dirac;
mod experiment;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::checkpoint::{Checkpoint, Shape};
use crate::linalg::{cayley4, compensated_sum, Mat4, C64, ZERO};

pub use experiment::{
    axis_total_variation, centroid_2d, lobe_metrics, run_experiment_2d, run_with_field, spread_2d, Experiment2D,
    ExperimentKind, LobeMetrics,
    RunOutput2D, Snapshot,
};

const PAR_ROWS: usize = 64;

/// `nz × ny` periodic grid with `Δz = Δy = Δt = h`. Site `(iz, iy)` is
/// stored at `iz·ny + iy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nz: usize,
    ny: usize,
    h: f64,
}

impl Grid2D {
    pub fn new(nz: usize, ny: usize, h: f64) -> Result<Self> {
        if nz < 4 || ny < 4 {
            return Err(Error::InvalidArgument(format!(
                "2-D grid needs at least 4×4 sites, got {nz}×{ny}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
        }
        Ok(Grid2D { nz, ny, h })
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dt(&self) -> f64 {
        self.h
    }

    pub fn sites(&self) -> usize {
        self.nz * self.ny
    }

    #[inline]
    pub fn index(&self, iz: usize, iy: usize) -> usize {
        iz * self.ny + iy
    }

    /// Physical coordinates `(z, y)` of a site.
    pub fn coords(&self, site: usize) -> (f64, f64) {
        ((site / self.ny) as f64 * self.h, (site % self.ny) as f64 * self.h)
    }

    /// Centre of the box.
    pub fn center(&self) -> (f64, f64) {
        (0.5 * self.nz as f64 * self.h, 0.5 * self.ny as f64 * self.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField2D {
    pub data: Vec<[C64; 4]>,
    pub step_index: u64,
}

impl SpinorField2D {
    pub fn zeros(grid: &Grid2D) -> Self {
        SpinorField2D {
            data: vec![[ZERO; 4]; grid.sites()],
            step_index: 0,
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for (site, p) in self.data.iter().enumerate() {
            if p.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::NonFinite {
                    site,
                    step: self.step_index,
                });
            }
        }
        Ok(())
    }

    pub fn max_diff(&self, other: &SpinorField2D) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| (0..4).map(move |c| (a[c] - b[c]).norm()))
            .fold(0.0, f64::max)
    }
}

/// `ρ = Σᵢ |ψᵢ|²` per site.
pub fn density_2d(f: &SpinorField2D) -> Vec<f64> {
    let rho = |p: &[C64; 4]| p.iter().map(|c| c.norm_sqr()).sum::<f64>();
    if f.data.len() >= 4096 {
        f.data.par_iter().map(rho).collect()
    } else {
        f.data.iter().map(rho).collect()
    }
}

pub fn norm_2d(f: &SpinorField2D, grid: &Grid2D) -> f64 {
    (compensated_sum(&density_2d(f)) * grid.spacing() * grid.spacing()).sqrt()
}

/// Gaussian packet `G₀ = (2πσ²)^{-1/2} exp(−r²/(4σ²))` about `center`:
/// `u₁ = u₂ = C_u G₀ e^{+ik·r}`, `d₁ = d₂ = C_d G₀ e^{−ik·r}`, with `r`
/// measured from the centre. Requires `2C_u² + 2C_d² = 1`; the sampled field
/// is renormalised to unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet2D {
    pub sigma: f64,
    pub kz: f64,
    pub ky: f64,
    pub c_u: f64,
    pub c_d: f64,
    pub center: Option<(f64, f64)>,
}

pub fn init_2d(grid: &Grid2D, p: &Packet2D) -> Result<SpinorField2D> {
    let constraint = 2.0 * p.c_u * p.c_u + 2.0 * p.c_d * p.c_d;
    if (constraint - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "spinor weights must satisfy 2C_u² + 2C_d² = 1, got {constraint}"
        )));
    }
    if !(p.sigma > 0.0 && p.sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("packet width must be positive, got {}", p.sigma)));
    }
    let (zc, yc) = p.center.unwrap_or_else(|| grid.center());
    let amp = 1.0 / (2.0 * std::f64::consts::PI * p.sigma * p.sigma).sqrt();
    let data: Vec<[C64; 4]> = (0..grid.sites())
        .map(|s| {
            let (z, y) = grid.coords(s);
            let (dz, dy) = (z - zc, y - yc);
            let g = amp * (-(dz * dz + dy * dy) / (4.0 * p.sigma * p.sigma)).exp();
            let phase = p.kz * dz + p.ky * dy;
            let u = C64::from_polar(p.c_u * g, phase);
            let d = C64::from_polar(p.c_d * g, -phase);
            [u, u, d, d]
        })
        .collect();
    let mut f = SpinorField2D { data, step_index: 0 };
    let n = norm_2d(&f, grid);
    if !(n > 0.0) {
        return Err(Error::InvalidArgument("packet has zero norm on this grid".into()));
    }
    let s = 1.0 / n;
    for p in &mut f.data {
        for c in p.iter_mut() {
            *c *= s;
        }
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityConfig {
    pub concentration: f64,
    pub v: f64,
    pub seed: u64,
}

impl ImpurityConfig {
    pub fn new(concentration: f64, v: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&concentration) {
            return Err(Error::InvalidArgument(format!(
                "impurity concentration must lie in [0, 1], got {concentration}"
            )));
        }
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("impurity height must be finite, got {v}")));
        }
        Ok(ImpurityConfig { concentration, v, seed })
    }

    pub fn count(&self, sites: usize) -> usize {
        (self.concentration * sites as f64).round() as usize
    }
}

/// Potential with exactly `round(C·N)` sites at height `V`, chosen without
/// replacement by `rand::seq::index::sample` driven by xoshiro256** seeded
/// through `seed_from_u64(seed)`.
pub fn impurity_field(grid: &Grid2D, cfg: &ImpurityConfig) -> Vec<f64> {
    let n = grid.sites();
    let mut v = vec![0.0; n];
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed);
    for i in rand::seq::index::sample(&mut rng, n, cfg.count(n)).iter() {
        v[i] = cfg.v;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NjlConfig {
    pub g: f64,
    pub m: f64,
}

/// Everything the collision needs besides the state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Medium2D {
    /// Bare mass; overridden by the NJL bare mass when NJL is on.
    pub mass: f64,
    /// Scalar potential `V` per site (`M₀` in 1-D language).
    pub potential: Option<Vec<f64>>,
    pub njl: Option<NjlConfig>,
}

impl Medium2D {
    fn bare_mass(&self) -> f64 {
        self.njl.map_or(self.mass, |n| n.m)
    }

    fn potential_at(&self, site: usize) -> f64 {
        self.potential.as_ref().map_or(0.0, |v| v[site])
    }

    fn coupling(&self) -> f64 {
        self.njl.map_or(0.0, |n| n.g)
    }
}

/// `β̃(m − gS) + V − g·P·γ̃⁰γ̃⁵`
pub fn local_hamiltonian(psi: &[C64; 4], m: f64, v: f64, g: f64) -> Mat4 {
    let mut h = dirac::beta().scale(C64::new(m, 0.0)) + Mat4::identity().scale(C64::new(v, 0.0));
    if g != 0.0 {
        let s = dirac::beta().expectation(psi).re;
        let p = dirac::gamma0_gamma5().expectation(psi);
        h = h - dirac::beta().scale(C64::new(g * s, 0.0)) - dirac::gamma0_gamma5().scale(p * g);
    }
    h
}

fn map_rows<F>(grid: &Grid2D, src: &[[C64; 4]], f: F) -> Vec<[C64; 4]>
where
    F: Fn(usize, usize, &[[C64; 4]]) -> [C64; 4] + Sync + Send,
{
    let ny = grid.ny();
    let mut out = vec![[ZERO; 4]; grid.sites()];
    let work = |(iz, row): (usize, &mut [[C64; 4]])| {
        for (iy, cell) in row.iter_mut().enumerate() {
            *cell = f(iz, iy, src);
        }
    };
    if grid.nz() >= PAR_ROWS {
        out.par_chunks_mut(ny).enumerate().for_each(work);
    } else {
        out.chunks_mut(ny).enumerate().for_each(work);
    }
    out
}

/// Streaming and rotations, without the collision.
pub fn stream_2d(f: &SpinorField2D, grid: &Grid2D) -> Vec<[C64; 4]> {
    let (nz, ny) = (grid.nz(), grid.ny());
    let zs = map_rows(grid, &f.data, |iz, iy, src| {
        let up = src[grid.index((iz + nz - 1) % nz, iy)];
        let down = src[grid.index((iz + 1) % nz, iy)];
        [up[0], up[1], down[2], down[3]]
    });
    let r = dirac::rotation_y();
    let rt = r.adjoint();
    let rotated: Vec<[C64; 4]> = zs.iter().map(|p| rt.apply(*p)).collect();
    let ys = map_rows(grid, &rotated, |iz, iy, src| {
        let up = src[grid.index(iz, (iy + ny - 1) % ny)];
        let down = src[grid.index(iz, (iy + 1) % ny)];
        r.apply([up[0], up[1], down[2], down[3]])
    });
    ys
}

/// One full step: stream, then collide with `cayley4(Δt/2, H_loc)`.
pub fn step_2d(f: &SpinorField2D, grid: &Grid2D, medium: &Medium2D) -> SpinorField2D {
    let streamed = stream_2d(f, grid);
    let (m, g, h) = (medium.bare_mass(), medium.coupling(), 0.5 * grid.dt());
    let data = if g == 0.0 {
        // Linear collision: one matrix per distinct potential value.
        let mut cache: Vec<(u64, Mat4)> = Vec::new();
        let zero = [ZERO; 4];
        let mut lookup = |v: f64| -> usize {
            let key = v.to_bits();
            match cache.iter().position(|(k, _)| *k == key) {
                Some(i) => i,
                None => {
                    cache.push((key, cayley4(h, &local_hamiltonian(&zero, m, v, 0.0))));
                    cache.len() - 1
                }
            }
        };
        let which: Vec<usize> = (0..grid.sites()).map(|s| lookup(medium.potential_at(s))).collect();
        let mats: Vec<Mat4> = cache.into_iter().map(|(_, m)| m).collect();
        streamed
            .par_iter()
            .zip(which.par_iter())
            .map(|(p, &w)| mats[w].apply(*p))
            .collect()
    } else {
        streamed
            .par_iter()
            .enumerate()
            .map(|(s, p)| {
                let hl = local_hamiltonian(p, m, medium.potential_at(s), g);
                cayley4(h, &hl).apply(*p)
            })
            .collect()
    };
    SpinorField2D {
        data,
        step_index: f.step_index + 1,
    }
}

pub fn checkpoint_2d(f: &SpinorField2D, grid: &Grid2D) -> Checkpoint {
    Checkpoint {
        shape: Shape::TwoD {
            nz: grid.nz(),
            ny: grid.ny(),
        },
        dz: grid.spacing(),
        dt: grid.dt(),
        step_index: f.step_index,
        payload: f.data.iter().flatten().copied().collect(),
    }
}

pub fn field_from_checkpoint(cp: &Checkpoint) -> Result<(SpinorField2D, Grid2D)> {
    let Shape::TwoD { nz, ny } = cp.shape else {
        return Err(Error::InvalidArgument("checkpoint holds a 1-D field".into()));
    };
    let grid = Grid2D::new(nz, ny, cp.dz)?;
    let data = cp.payload.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
    Ok((
        SpinorField2D {
            data,
            step_index: cp.step_index,
        },
        grid,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{init_packet, ConstantMass, Lattice1D, Mass, PacketKind};
    use crate::solvers::{solve, SchemeKind};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, n, 1.0).unwrap()
    }

    fn packet(sigma: f64, k: f64, cu: f64, cd: f64) -> Packet2D {
        Packet2D {
            sigma,
            kz: k,
            ky: k,
            c_u: cu,
            c_d: cd,
            center: None,
        }
    }

    #[test]
    fn init_density_is_gaussian() {
        let g = grid(64);
        let f = init_2d(&g, &packet(4.0, 0.3, 0.5, 0.5)).unwrap();
        assert!((norm_2d(&f, &g) - 1.0).abs() < 1e-12);
        let rho = density_2d(&f);
        let (zc, yc) = g.center();
        for s in [0, 100, g.index(32, 32), g.index(30, 40)] {
            let (z, y) = g.coords(s);
            let r2 = (z - zc).powi(2) + (y - yc).powi(2);
            let g0 = (-r2 / (4.0 * 16.0)).exp() / (2.0 * std::f64::consts::PI * 16.0).sqrt();
            assert!((rho[s] - g0 * g0).abs() < 1e-12);
        }
    }

    #[test]
    fn init_rejects_bad_weights() {
        assert!(init_2d(&grid(16), &packet(2.0, 0.0, 0.5, 0.4)).is_err());
        assert!(init_2d(&grid(16), &packet(0.0, 0.0, 0.5, 0.5)).is_err());
    }

    #[test]
    fn impurity_counts() {
        let g = grid(256);
        assert!(impurity_field(&g, &ImpurityConfig::new(0.0, 1.0, 3).unwrap()).iter().all(|&v| v == 0.0));
        assert!(impurity_field(&g, &ImpurityConfig::new(1.0, 0.5, 3).unwrap()).iter().all(|&v| v == 0.5));
        let v = impurity_field(&g, &ImpurityConfig::new(0.005, 0.2, 3).unwrap());
        assert_eq!(v.iter().filter(|&&x| x != 0.0).count(), 328);
        assert_eq!(ImpurityConfig::new(0.005, 1.0, 0).unwrap().count(2048 * 512), 5243);
        assert_eq!(v, impurity_field(&g, &ImpurityConfig::new(0.005, 0.2, 3).unwrap()));
        assert!(ImpurityConfig::new(1.5, 1.0, 0).is_err());
    }

    #[test]
    fn impurity_placement_is_uniform_across_seeds() {
        let g = grid(32);
        let (c, seeds) = (0.1, 100);
        let mut quadrant = [0usize; 4];
        for seed in 0..seeds {
            let v = impurity_field(&g, &ImpurityConfig::new(c, 1.0, seed).unwrap());
            for (s, x) in v.iter().enumerate() {
                if *x != 0.0 {
                    let (iz, iy) = (s / 32, s % 32);
                    quadrant[(iz / 16) * 2 + iy / 16] += 1;
                }
            }
        }
        let n = (seeds as f64) * 256.0;
        let mean = n * c;
        let sd = (n * c * (1.0 - c)).sqrt();
        for q in quadrant {
            assert!((q as f64 - mean).abs() <= 3.0 * sd, "{quadrant:?}");
        }
    }

    #[test]
    fn massless_z_packet_streams_without_y_change() {
        let g = grid(32);
        let mut f = SpinorField2D::zeros(&g);
        let profile = |iy: usize| (-(iy as f64 - 16.0).powi(2) / 8.0).exp();
        for iy in 0..32 {
            f.data[g.index(5, iy)] = [C64::new(profile(iy), 0.0), ZERO, ZERO, ZERO];
        }
        // u₁ alone is not an α̃y eigenstate, but the y-sweep of a y-uniform
        // row is the identity, so use a y-uniform field for the exact check.
        let mut uni = SpinorField2D::zeros(&g);
        for iy in 0..32 {
            uni.data[g.index(5, iy)] = [C64::new(0.3, 0.1), C64::new(-0.2, 0.0), ZERO, ZERO];
        }
        let out = step_2d(&uni, &g, &Medium2D::default());
        for iy in 0..32 {
            assert!((out.data[g.index(6, iy)][0] - C64::new(0.3, 0.1)).norm() < 1e-15);
            assert!((out.data[g.index(6, iy)][1] - C64::new(-0.2, 0.0)).norm() < 1e-15);
        }
        let out = step_2d(&f, &g, &Medium2D::default());
        let rho = density_2d(&out);
        let total: f64 = rho.iter().sum();
        let row: f64 = (0..32).map(|iy| rho[g.index(6, iy)]).sum();
        assert!((total - row).abs() < 1e-14 * total);
    }

    #[test]
    fn linear_evolution_is_unitary() {
        let g = grid(48);
        let mut f = init_2d(&g, &packet(4.0, 0.4, 0.5, 0.5)).unwrap();
        let medium = Medium2D {
            mass: 0.1,
            potential: Some(impurity_field(&g, &ImpurityConfig::new(0.05, 0.3, 1).unwrap())),
            njl: None,
        };
        for _ in 0..200 {
            f = step_2d(&f, &g, &medium);
        }
        assert!((norm_2d(&f, &g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn njl_collision_is_unitary_and_vanishes_at_zero_coupling() {
        let g = grid(32);
        let f = init_2d(&g, &packet(3.0, 0.4, 0.5, 0.5)).unwrap();
        let plain = Medium2D::default();
        let zero = Medium2D {
            njl: Some(NjlConfig { g: 0.0, m: 0.0 }),
            ..Medium2D::default()
        };
        assert_eq!(step_2d(&f, &g, &plain), step_2d(&f, &g, &zero));
        let strong = Medium2D {
            njl: Some(NjlConfig { g: 1000.0, m: 0.0 }),
            ..Medium2D::default()
        };
        let mut h = f.clone();
        for _ in 0..20 {
            h = step_2d(&h, &g, &strong);
        }
        assert!((norm_2d(&h, &g) - 1.0).abs() < 1e-12);
        assert!(h.max_diff(&{
            let mut p = f;
            for _ in 0..20 {
                p = step_2d(&p, &g, &plain);
            }
            p
        }) > 1e-6);
    }

    #[test]
    fn local_hamiltonian_is_hermitian() {
        let psi = [C64::new(0.3, 0.2), C64::new(-0.1, 0.5), C64::new(0.7, -0.2), C64::new(0.0, 0.4)];
        let h = local_hamiltonian(&psi, 0.3, 0.2, 50.0);
        assert!(h.dist(&h.adjoint()) < 1e-13);
        let p = dirac::gamma0_gamma5().expectation(&psi);
        assert!(p.re.abs() < 1e-15);
    }

    #[test]
    fn y_uniform_row_matches_one_dimensional_qlb() {
        let (nz, ny, m, v) = (64, 8, 0.3, 0.15);
        let g = Grid2D::new(nz, ny, 0.5).unwrap();
        let lat = Lattice1D::flat(nz, 0.5).unwrap();
        let a = init_packet(&lat, PacketKind::gaussian(2.0, 0.7), [C64::new(1.0, 0.0), C64::new(0.0, 0.5)]).unwrap();
        let b = init_packet(&lat, PacketKind::gaussian(3.0, -0.4), [C64::new(0.2, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let mut f = SpinorField2D::zeros(&g);
        for iz in 0..nz {
            for iy in 0..ny {
                // (u₁, d₁) carries copy a, (u₂, d₂) carries copy b
                f.data[g.index(iz, iy)] = [a.data[iz][0], b.data[iz][0], a.data[iz][1], b.data[iz][1]];
            }
        }
        let medium = Medium2D {
            mass: m,
            potential: Some(vec![v; g.sites()]),
            njl: None,
        };
        let steps = 25;
        for _ in 0..steps {
            f = step_2d(&f, &g, &medium);
        }
        let mass = ConstantMass(Mass::new(v, 0.0, m, 0.0));
        let a1 = solve(SchemeKind::Qlb, mass, &lat, a, steps).unwrap();
        let b1 = solve(SchemeKind::Qlb, mass, &lat, b, steps).unwrap();
        for iz in 0..nz {
            for iy in 0..ny {
                let p = f.data[g.index(iz, iy)];
                let err = (p[0] - a1.data[iz][0]).norm()
                    + (p[2] - a1.data[iz][1]).norm()
                    + (p[1] - b1.data[iz][0]).norm()
                    + (p[3] - b1.data[iz][1]).norm();
                assert!(err < 1e-12, "site ({iz},{iy}): {err}");
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let g = Grid2D::new(8, 6, 0.5).unwrap();
        let f = init_2d(&g, &packet(1.5, 0.2, FRAC_1_SQRT_2, 0.0)).unwrap();
        let bytes = checkpoint_2d(&f, &g).encode();
        let (h, g2) = field_from_checkpoint(&Checkpoint::decode(&bytes).unwrap()).unwrap();
        assert_eq!(g, g2);
        assert_eq!(f, h);
    }
}
