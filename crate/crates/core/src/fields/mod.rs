//! Lattices, bi-spinor fields, initial packets and observables.
//!
//! Units are lattice units with `c = ħ = 1`. Flat-space solvers require
//! `dz == dt` so that streaming is an exact one-site shift.

pub mod checkpoint;
mod mass;

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::linalg::{compensated_sum, C64, ZERO};

pub use mass::{ConstantMass, FnMass, Mass, MassField, SampledMass};

/// Below this many sites the per-site loops stay serial.
pub(crate) const PAR_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    /// Specular walls: an up-mover leaving the last site re-enters as the
    /// down-mover of that site, and vice versa at site 0.
    Reflecting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice1D {
    n_sites: usize,
    dz: f64,
    dt: f64,
    boundary: Boundary,
}

impl Lattice1D {
    pub fn new(n_sites: usize, dz: f64, dt: f64, boundary: Boundary) -> Result<Self> {
        if n_sites < 4 {
            return Err(Error::InvalidArgument(format!(
                "lattice needs at least 4 sites, got {n_sites}"
            )));
        }
        if !(dz > 0.0 && dz.is_finite()) || !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dz and dt must be positive and finite (dz = {dz}, dt = {dt})"
            )));
        }
        Ok(Lattice1D {
            n_sites,
            dz,
            dt,
            boundary,
        })
    }

    /// Periodic lattice with `dt = dz` (CFL = 1).
    pub fn flat(n_sites: usize, dz: f64) -> Result<Self> {
        Self::new(n_sites, dz, dz, Boundary::Periodic)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Lattice speed `c = dz / dt`.
    pub fn speed(&self) -> f64 {
        self.dz / self.dt
    }

    pub fn length(&self) -> f64 {
        self.n_sites as f64 * self.dz
    }

    pub fn z(&self, site: usize) -> f64 {
        site as f64 * self.dz
    }

    /// Flat-space schemes stream exactly one site per step only when `dz == dt`.
    pub fn require_cfl_one(&self) -> Result<()> {
        if (self.dz - self.dt).abs() > 1e-12 * self.dz.max(self.dt) {
            return Err(Error::InvalidConfiguration(format!(
                "flat-space schemes need dz == dt (CFL = 1), got dz = {}, dt = {}",
                self.dz, self.dt
            )));
        }
        Ok(())
    }

    /// Index of the left neighbour, or `None` at a reflecting wall.
    #[inline]
    pub fn left(&self, site: usize) -> Option<usize> {
        match (site, self.boundary) {
            (0, Boundary::Periodic) => Some(self.n_sites - 1),
            (0, Boundary::Reflecting) => None,
            (j, _) => Some(j - 1),
        }
    }

    /// Index of the right neighbour, or `None` at a reflecting wall.
    #[inline]
    pub fn right(&self, site: usize) -> Option<usize> {
        let last = self.n_sites - 1;
        match (site, self.boundary) {
            (j, Boundary::Periodic) if j == last => Some(0),
            (j, Boundary::Reflecting) if j == last => None,
            (j, _) => Some(j + 1),
        }
    }

    /// Neighbour index clamped at walls; for stencils that need a value
    /// rather than an incoming amplitude.
    pub fn left_or_self(&self, site: usize) -> usize {
        self.left(site).unwrap_or(site)
    }

    pub fn right_or_self(&self, site: usize) -> usize {
        self.right(site).unwrap_or(site)
    }
}

/// Bi-spinor amplitudes `(ψ₁, ψ₂)` on every site; `ψ₁` moves up, `ψ₂` down.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField1D {
    pub data: Vec<[C64; 2]>,
    pub step_index: u64,
}

impl SpinorField1D {
    pub fn zeros(lat: &Lattice1D) -> Self {
        SpinorField1D {
            data: vec![[ZERO; 2]; lat.n_sites()],
            step_index: 0,
        }
    }

    pub fn new(data: Vec<[C64; 2]>, lat: &Lattice1D) -> Result<Self> {
        if data.len() != lat.n_sites() {
            return Err(Error::InvalidArgument(format!(
                "field has {} sites, lattice has {}",
                data.len(),
                lat.n_sites()
            )));
        }
        let f = SpinorField1D {
            data,
            step_index: 0,
        };
        f.check_finite()?;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// First non-finite amplitude, reported with the field's step index.
    pub fn check_finite(&self) -> Result<()> {
        match self
            .data
            .iter()
            .position(|p| p.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())))
        {
            Some(site) => Err(Error::NonFinite {
                site,
                step: self.step_index,
            }),
            None => Ok(()),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        SpinorField1D {
            data: self.data.iter().map(|p| [p[0] * s, p[1] * s]).collect(),
            step_index: self.step_index,
        }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_diff(&self, other: &SpinorField1D) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| [(a[0] - b[0]).norm(), (a[1] - b[1]).norm()])
            .fold(0.0, f64::max)
    }

    /// Discrete L² distance `√(Σ |ψ − φ|² dz)`.
    pub fn l2_diff(&self, other: &SpinorField1D, dz: f64) -> f64 {
        let terms: Vec<f64> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr())
            .collect();
        (compensated_sum(&terms) * dz).sqrt()
    }
}

/// Shape of a 1-D initial packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PacketKind {
    /// `exp(−(z − center)²/(4σ²)) · exp(i k₀ z)`; `center = None` puts it
    /// at the middle of the lattice.
    Gaussian {
        sigma: f64,
        k0: f64,
        center: Option<f64>,
    },
    PlaneWave { k: f64 },
    Delta { site: usize },
}

impl PacketKind {
    pub fn gaussian(sigma: f64, k0: f64) -> Self {
        PacketKind::Gaussian {
            sigma,
            k0,
            center: None,
        }
    }
}

/// Build an L²-normalised packet carrying the spinor `weights` at every site.
pub fn init_packet(lat: &Lattice1D, kind: PacketKind, weights: [C64; 2]) -> Result<SpinorField1D> {
    if weights.iter().all(|w| *w == ZERO) {
        return Err(Error::InvalidArgument("spinor weights are both zero".into()));
    }
    if weights.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
        return Err(Error::InvalidArgument("spinor weights must be finite".into()));
    }
    let n = lat.n_sites();
    let profile: Vec<C64> = match kind {
        PacketKind::Gaussian { sigma, k0, center } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "gaussian width must be positive, got {sigma}"
                )));
            }
            let zc = center.unwrap_or(0.5 * lat.length());
            (0..n)
                .map(|j| {
                    let z = lat.z(j);
                    let env = (-(z - zc).powi(2) / (4.0 * sigma * sigma)).exp();
                    C64::from_polar(env, k0 * z)
                })
                .collect()
        }
        PacketKind::PlaneWave { k } => (0..n).map(|j| C64::from_polar(1.0, k * lat.z(j))).collect(),
        PacketKind::Delta { site } => {
            if site >= n {
                return Err(Error::InvalidArgument(format!(
                    "delta site {site} outside lattice of {n} sites"
                )));
            }
            (0..n)
                .map(|j| if j == site { C64::new(1.0, 0.0) } else { ZERO })
                .collect()
        }
    };
    let mut f = SpinorField1D {
        data: profile.iter().map(|&p| [weights[0] * p, weights[1] * p]).collect(),
        step_index: 0,
    };
    let nrm = norm(&f, lat);
    if !(nrm > 0.0) {
        return Err(Error::InvalidArgument("packet has zero norm on this lattice".into()));
    }
    f = f.scaled(C64::new(1.0 / nrm, 0.0));
    f.check_finite()?;
    Ok(f)
}

/// `ρⱼ = |ψ₁ⱼ|² + |ψ₂ⱼ|²`
pub fn density(f: &SpinorField1D) -> Vec<f64> {
    let rho = |p: &[C64; 2]| p[0].norm_sqr() + p[1].norm_sqr();
    if f.len() >= PAR_THRESHOLD {
        f.data.par_iter().map(rho).collect()
    } else {
        f.data.iter().map(rho).collect()
    }
}

/// `Σ ρⱼ dz` with compensated pairwise summation.
pub fn norm_squared(f: &SpinorField1D, lat: &Lattice1D) -> f64 {
    compensated_sum(&density(f)) * lat.dz()
}

pub fn norm(f: &SpinorField1D, lat: &Lattice1D) -> f64 {
    norm_squared(f, lat).sqrt()
}

/// Mean position `Σ z ρ dz / Σ ρ dz` (no periodic unwrapping).
pub fn centroid(f: &SpinorField1D, lat: &Lattice1D) -> f64 {
    let rho = density(f);
    let weighted: Vec<f64> = rho.iter().enumerate().map(|(j, r)| lat.z(j) * r).collect();
    compensated_sum(&weighted) / compensated_sum(&rho)
}

/// Write the density as CSV with header `j,z,rho`, values in `%.17g`.
pub fn write_density_csv<W: Write>(out: &mut W, f: &SpinorField1D, lat: &Lattice1D) -> std::io::Result<()> {
    writeln!(out, "j,z,rho")?;
    for (j, r) in density(f).iter().enumerate() {
        writeln!(out, "{},{},{}", j, g17(lat.z(j)), g17(*r))?;
    }
    Ok(())
}

/// Lowest lattice wavenumber on a periodic lattice, `2π / (n·dz)`.
pub fn fundamental_wavenumber(lat: &Lattice1D) -> f64 {
    2.0 * PI / lat.length()
}
