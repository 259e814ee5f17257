//! Quantum-walk engine for lattice discretizations of the Dirac equation.
//!
//! Every flat-space scheme here (operator splitting, quantum lattice
//! Boltzmann and the unstable naive lattice Boltzmann scheme) is a stream-collide
//! map `ψ ← B·Sψ`: a one-site shift `S` followed by a per-site 2×2 coin `B`.
//! The [`walk`] engine runs any such schedule; [`coin`] builds the coins and
//! converts exactly between mass-matrix and Euler-angle parameters.
//!
//! The remaining modules build on that core: [`equilibrium`] rewrites a step
//! in relaxation form, [`curved`] adds residency/transfer matrices for a
//! finite-volume scheme on a non-uniform metric, [`multid`] is a (2+1)-D
//! split solver with optional NJL self-interaction, and [`harness`] drives
//! everything from TOML configs.

pub mod coin;
pub mod curved;
pub mod equilibrium;
pub mod error;
pub mod fields;
pub mod fmt;
pub mod harness;
pub mod linalg;
pub mod multid;
pub mod solvers;
pub mod walk;

pub use error::{Error, Result};
