//! Stream-collide engine: shift the bi-spinor one site, then apply a per-site
//! coin, optionally with a residency term that keeps part of the amplitude in
//! place.
//!
//! ```text
//! plain:      ψⱼⁿ⁺¹ = Bⱼ,ₙ · (ψ₁,ⱼ₋₁, ψ₂,ⱼ₊₁)
//! residency:  ψⱼⁿ⁺¹ = Rⱼ,ₙ · ψⱼ + Tⱼ,ₙ · (ψ₁,ⱼ₋₁, ψ₂,ⱼ₊₁)
//! ```
//!
//! Each step writes a fresh buffer, so neighbour reads never alias writes.
//! Sites are processed in parallel above a size threshold; every site is
//! computed by the same arithmetic either way, so results are bitwise
//! independent of the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{Lattice1D, SpinorField1D, PAR_THRESHOLD};
use crate::linalg::{Mat2, C64};

/// Per-site, per-step coin provider.
pub trait CoinSchedule: Sync {
    /// Coin (or transfer matrix `T` in residency form) at site `j`, step `n`.
    fn coin(&self, site: usize, step: u64) -> Mat2;

    /// Residency matrix `R`; `None` for a plain quantum walk.
    fn residency(&self, _site: usize, _step: u64) -> Option<Mat2> {
        None
    }

    fn has_residency(&self) -> bool {
        false
    }
}

impl<T: CoinSchedule + ?Sized> CoinSchedule for &T {
    fn coin(&self, site: usize, step: u64) -> Mat2 {
        (**self).coin(site, step)
    }
    fn residency(&self, site: usize, step: u64) -> Option<Mat2> {
        (**self).residency(site, step)
    }
    fn has_residency(&self) -> bool {
        (**self).has_residency()
    }
}

/// The same coin at every site and step.
#[derive(Debug, Clone, Copy)]
pub struct UniformCoin(pub Mat2);

impl CoinSchedule for UniformCoin {
    fn coin(&self, _site: usize, _step: u64) -> Mat2 {
        self.0
    }
}

/// Precomputed per-site tables, valid for a single step.
#[derive(Debug, Clone)]
pub struct TableSchedule {
    pub transfer: Vec<Mat2>,
    pub residency: Option<Vec<Mat2>>,
}

impl CoinSchedule for TableSchedule {
    fn coin(&self, site: usize, _step: u64) -> Mat2 {
        self.transfer[site]
    }
    fn residency(&self, site: usize, _step: u64) -> Option<Mat2> {
        self.residency.as_ref().map(|r| r[site])
    }
    fn has_residency(&self) -> bool {
        self.residency.is_some()
    }
}

/// `(ψ₁,ⱼ₋₁, ψ₂,ⱼ₊₁)`; at reflecting walls the outgoing component of the
/// wall site comes back as the other component.
#[inline]
fn incoming(data: &[[C64; 2]], lat: &Lattice1D, j: usize) -> [C64; 2] {
    let up = match lat.left(j) {
        Some(l) => data[l][0],
        None => data[j][1],
    };
    let down = match lat.right(j) {
        Some(r) => data[r][1],
        None => data[j][0],
    };
    [up, down]
}

fn map_sites<F>(n: usize, f: F) -> Vec<[C64; 2]>
where
    F: Fn(usize) -> [C64; 2] + Sync + Send,
{
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Pure streaming. Does not advance `step_index`.
pub fn shift(f: &SpinorField1D, lat: &Lattice1D) -> SpinorField1D {
    let data = map_sites(f.len(), |j| incoming(&f.data, lat, j));
    SpinorField1D {
        data,
        step_index: f.step_index,
    }
}

/// One plain step with the coins of step `f.step_index`; any residency part
/// of `sched` is ignored.
pub fn step<S: CoinSchedule + ?Sized>(f: &SpinorField1D, lat: &Lattice1D, sched: &S) -> SpinorField1D {
    let n = f.step_index;
    let data = map_sites(f.len(), |j| sched.coin(j, n).apply(incoming(&f.data, lat, j)));
    SpinorField1D {
        data,
        step_index: n + 1,
    }
}

/// One residency step; sites without a residency matrix behave as `R = 0`.
pub fn step_with_residency<S: CoinSchedule + ?Sized>(
    f: &SpinorField1D,
    lat: &Lattice1D,
    sched: &S,
) -> SpinorField1D {
    let n = f.step_index;
    let data = map_sites(f.len(), |j| {
        let streamed = sched.coin(j, n).apply(incoming(&f.data, lat, j));
        match sched.residency(j, n) {
            Some(r) => {
                let kept = r.apply(f.data[j]);
                [kept[0] + streamed[0], kept[1] + streamed[1]]
            }
            None => streamed,
        }
    });
    SpinorField1D {
        data,
        step_index: n + 1,
    }
}

/// Plain or residency step, whichever the schedule provides.
pub fn advance<S: CoinSchedule + ?Sized>(f: &SpinorField1D, lat: &Lattice1D, sched: &S) -> SpinorField1D {
    if sched.has_residency() {
        step_with_residency(f, lat, sched)
    } else {
        step(f, lat, sched)
    }
}

pub type ObserverFn<'a> = dyn FnMut(u64, &SpinorField1D) -> std::result::Result<(), String> + 'a;

/// Callback invoked on the initial field and after every step whose index is
/// a multiple of `stride`.
pub struct Observer<'a> {
    pub stride: u64,
    pub callback: Box<ObserverFn<'a>>,
}

impl<'a> Observer<'a> {
    pub const DEFAULT_STRIDE: u64 = 100;

    pub fn new(stride: u64, callback: impl FnMut(u64, &SpinorField1D) -> std::result::Result<(), String> + 'a) -> Self {
        Observer {
            stride: stride.max(1),
            callback: Box::new(callback),
        }
    }

    pub(crate) fn notify(&mut self, f: &SpinorField1D) -> Result<()> {
        if f.step_index % self.stride == 0 {
            (self.callback)(f.step_index, f).map_err(|message| Error::Observer {
                step: f.step_index,
                message,
            })?;
        }
        Ok(())
    }
}

/// Run `n_steps` steps. Every new field is checked for NaN/Inf, which aborts
/// with the offending site and step.
pub fn evolve<S: CoinSchedule + ?Sized>(
    f: SpinorField1D,
    lat: &Lattice1D,
    sched: &S,
    n_steps: u64,
    mut observer: Option<&mut Observer<'_>>,
) -> Result<SpinorField1D> {
    if let Some(obs) = observer.as_deref_mut() {
        obs.notify(&f)?;
    }
    let mut cur = f;
    for _ in 0..n_steps {
        cur = advance(&cur, lat, sched);
        cur.check_finite()?;
        if let Some(obs) = observer.as_deref_mut() {
            obs.notify(&cur)?;
        }
    }
    Ok(cur)
}
