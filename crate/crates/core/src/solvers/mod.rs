//! The three flat-space Dirac schemes as coin schedules.
//!
//! | scheme  | coin `Bⱼ,ₙ`                              | unitary |
//! |---------|------------------------------------------|---------|
//! | `split` | `exp(−iΔt·Mⱼ,ₙ)`                         | yes     |
//! | `qlb`   | `(I + iΔt/2·M)⁻¹ (I − iΔt/2·M)`          | yes     |
//! | `naive` | `I − iΔt·M`                              | no      |
//!
//! All three sample `M` at the beginning of the step, `Mⱼ,ₙ = M(nΔt, jΔz)`,
//! and all require `Δz = Δt` so that streaming is a one-site shift.

mod analysis;

use std::fmt;
use std::str::FromStr;

use crate::coin::{
    cayley_coin, euler_coin, euler_from_mass_qlb, euler_from_mass_split, exp_coin, naive_transfer, CoinParams,
    MassSample,
};
use crate::error::{Error, Result};
use crate::fields::{Lattice1D, MassField, SpinorField1D};
use crate::linalg::Mat2;
use crate::walk::{evolve, CoinSchedule, Observer};

pub use analysis::{
    convergence_order, dispersion, least_squares_slope, plane_wave, scheme_gap_order, ConvergenceReport,
    ConvergenceSetup, DispersionPoint, Reference,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Split,
    Qlb,
    Naive,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Split, SchemeKind::Qlb, SchemeKind::Naive];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Split => "split",
            SchemeKind::Qlb => "qlb",
            SchemeKind::Naive => "naive",
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, SchemeKind::Naive)
    }

    /// The coin this scheme applies for one mass sample.
    pub fn coin(self, m: MassSample) -> Mat2 {
        match self {
            SchemeKind::Split => exp_coin(m).into(),
            SchemeKind::Qlb => cayley_coin(m).into(),
            SchemeKind::Naive => naive_transfer(m),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(SchemeKind::Split),
            "qlb" => Ok(SchemeKind::Qlb),
            "naive" => Ok(SchemeKind::Naive),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme `{other}` (expected split, qlb or naive)"
            ))),
        }
    }
}

/// A scheme bound to a mass field and lattice.
pub struct SchemeSchedule<M> {
    kind: SchemeKind,
    mass: M,
    lat: Lattice1D,
}

impl<M: MassField> SchemeSchedule<M> {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn sample(&self, site: usize, step: u64) -> MassSample {
        MassSample::new(self.mass.sample(site, step, &self.lat), self.lat.dt())
    }
}

impl<M: MassField> CoinSchedule for SchemeSchedule<M> {
    fn coin(&self, site: usize, step: u64) -> Mat2 {
        self.kind.coin(self.sample(site, step))
    }
}

pub fn make_schedule<M: MassField>(kind: SchemeKind, mass: M, lat: &Lattice1D) -> Result<SchemeSchedule<M>> {
    lat.require_cfl_one()?;
    Ok(SchemeSchedule { kind, mass, lat: *lat })
}

/// Which exact parameter map an [`EulerSchedule`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamMap {
    Split,
    Qlb,
}

impl ParamMap {
    pub fn params(self, m: MassSample) -> CoinParams {
        match self {
            ParamMap::Split => euler_from_mass_split(m),
            ParamMap::Qlb => euler_from_mass_qlb(m),
        }
    }
}

/// A generic quantum walk whose Euler angles come from a mass field through
/// one of the parameter maps. Runs the same physics as the corresponding
/// [`SchemeSchedule`] without ever forming `exp` or the Cayley transform.
pub struct EulerSchedule<M> {
    map: ParamMap,
    mass: M,
    lat: Lattice1D,
}

impl<M: MassField> EulerSchedule<M> {
    pub fn new(map: ParamMap, mass: M, lat: &Lattice1D) -> Self {
        EulerSchedule { map, mass, lat: *lat }
    }
}

impl<M: MassField> CoinSchedule for EulerSchedule<M> {
    fn coin(&self, site: usize, step: u64) -> Mat2 {
        let m = MassSample::new(self.mass.sample(site, step, &self.lat), self.lat.dt());
        euler_coin(self.map.params(m)).into()
    }
}

/// Evolve `initial` for `n_steps` steps of `kind`.
pub fn solve<M: MassField>(
    kind: SchemeKind,
    mass: M,
    lat: &Lattice1D,
    initial: SpinorField1D,
    n_steps: u64,
) -> Result<SpinorField1D> {
    solve_observed(kind, mass, lat, initial, n_steps, None)
}

pub fn solve_observed<M: MassField>(
    kind: SchemeKind,
    mass: M,
    lat: &Lattice1D,
    initial: SpinorField1D,
    n_steps: u64,
    observer: Option<&mut Observer<'_>>,
) -> Result<SpinorField1D> {
    let sched = make_schedule(kind, mass, lat)?;
    evolve(initial, lat, &sched, n_steps, observer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{init_packet, norm, Boundary, ConstantMass, FnMass, Mass, PacketKind};
    use crate::linalg::{C64, ONE, ZERO};
    use crate::walk;

    #[test]
    fn rejects_cfl_violation() {
        let lat = Lattice1D::new(16, 1.0, 0.5, Boundary::Periodic).unwrap();
        let err = make_schedule(SchemeKind::Qlb, ConstantMass(Mass::ZERO), &lat).err().unwrap();
        assert!(matches!(err, Error::InvalidConfiguration(_)));
    }

    #[test]
    fn zero_mass_is_streaming() {
        let lat = Lattice1D::flat(32, 0.25).unwrap();
        let f = init_packet(&lat, PacketKind::gaussian(1.0, 2.0), [ONE, C64::new(0.0, 1.0)]).unwrap();
        for kind in SchemeKind::ALL {
            let sched = make_schedule(kind, ConstantMass(Mass::ZERO), &lat).unwrap();
            assert_eq!(sched.coin(3, 7), Mat2::identity());
            let out = solve(kind, ConstantMass(Mass::ZERO), &lat, f.clone(), 5).unwrap();
            for j in 0..32 {
                assert_eq!(out.data[j][0], f.data[(j + 32 - 5) % 32][0]);
                assert_eq!(out.data[j][1], f.data[(j + 5) % 32][1]);
            }
        }
    }

    #[test]
    fn naive_growth_law() {
        let (m, dt) = (0.3, 0.1);
        let lat = Lattice1D::flat(64, dt).unwrap();
        let f = init_packet(&lat, PacketKind::gaussian(0.8, 0.0), [ONE, ZERO]).unwrap();
        let out = solve(SchemeKind::Naive, ConstantMass(Mass::free(m)), &lat, f, 200).unwrap();
        let expect = (1.0 + dt * dt * m * m).powf(100.0);
        assert!((norm(&out, &lat) / expect - 1.0).abs() < 1e-8);
    }

    #[test]
    fn solve_is_a_thin_wrapper() {
        let lat = Lattice1D::flat(40, 0.5).unwrap();
        let mass = FnMass(|z: f64, t: f64| Mass::new(0.1 * z.sin(), 0.2, 0.3 * t.cos(), -0.1));
        let f = init_packet(&lat, PacketKind::gaussian(2.0, 0.5), [ONE, ONE]).unwrap();
        let direct = solve(SchemeKind::Qlb, &mass, &lat, f.clone(), 9).unwrap();
        let sched = make_schedule(SchemeKind::Qlb, &mass, &lat).unwrap();
        let mut g = f;
        for _ in 0..9 {
            g = walk::step(&g, &lat, &sched);
        }
        assert_eq!(direct, g);
    }

    #[test]
    fn scheme_names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("lbm".parse::<SchemeKind>().is_err());
    }
}
